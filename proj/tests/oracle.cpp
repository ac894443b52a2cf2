#include "oracle.hpp"

#include <openssl/evp.h>

#include <cstring>

namespace oracle {

using namespace pdrima;

Digest sha256(std::span<const std::uint8_t> data) {
    Digest d;
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(),
               nullptr);
    return d;
}

Digest sha256_concat(std::span<const std::uint8_t> a,
                     std::span<const std::uint8_t> b) {
    std::vector<std::uint8_t> buf(a.begin(), a.end());
    buf.insert(buf.end(), b.begin(), b.end());
    return sha256(buf);
}

Digest measure_segments(const std::vector<measure::Segment>& segs) {
    Digest chain{}; // zero seed
    for (const auto& s : segs) {
        Digest sh = sha256(s.data);
        chain = sha256_concat(chain.bytes, sh.bytes);
    }
    return chain;
}

namespace {

// Independent re-statement of the condition semantics; deliberately not
// calling into pdrima::policy.
bool oracle_condition(const policy::Condition& c, const policy::EventContext& ctx) {
    if (std::holds_alternative<policy::UuidEquals>(c)) {
        if (!ctx.subject_uuid.has_value()) return false;
        return std::get<policy::UuidEquals>(c).value == *ctx.subject_uuid;
    }
    if (std::holds_alternative<policy::SyscallNumberEquals>(c)) {
        if (!ctx.syscall_number.has_value()) return false;
        return std::get<policy::SyscallNumberEquals>(c).value == *ctx.syscall_number;
    }
    if (std::holds_alternative<policy::CallerUuidEquals>(c)) {
        if (!ctx.caller_uuid.has_value()) return false;
        return std::get<policy::CallerUuidEquals>(c).value == *ctx.caller_uuid;
    }
    if (!ctx.object_size.has_value()) return false;
    return *ctx.object_size >= std::get<policy::MinSizeBytes>(c).value;
}

bool oracle_rule(const policy::PolicyRule& r, const policy::EventContext& ctx) {
    if (r.event != ctx.event) return false;
    for (const auto& c : r.conditions)
        if (!oracle_condition(c, ctx)) return false;
    return true;
}

} // namespace

std::optional<std::size_t> first_match(const std::vector<policy::PolicyRule>& rules,
                                       const policy::EventContext& ctx) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!oracle_rule(rules[i], ctx)) continue;
        if (!best || i < *best) best = i;
    }
    return best;
}

std::vector<std::uint8_t> random_bytes(Rng& rng, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
    std::uniform_int_distribution<int> byte_dist(0, 255);
    std::vector<std::uint8_t> out(len_dist(rng));
    for (auto& b : out) b = std::uint8_t(byte_dist(rng));
    return out;
}

Uuid random_uuid(Rng& rng) {
    std::uniform_int_distribution<int> dist(0, 255);
    Uuid u;
    for (auto& b : u) b = std::uint8_t(dist(rng));
    return u;
}

Digest random_digest(Rng& rng) {
    std::uniform_int_distribution<int> dist(0, 255);
    Digest d;
    for (auto& b : d.bytes) b = std::uint8_t(dist(rng));
    return d;
}

std::vector<measure::Segment> random_segments(Rng& rng, std::size_t count,
                                              std::size_t max_size) {
    std::vector<measure::Segment> segs;
    for (std::size_t i = 0; i < count; ++i)
        segs.push_back({"seg" + std::to_string(i), random_bytes(rng, max_size)});
    return segs;
}

policy::PolicyRule random_rule(Rng& rng) {
    std::uniform_int_distribution<int> event_dist(0, 6);
    std::uniform_int_distribution<int> action_dist(0, 1);
    std::uniform_int_distribution<int> cond_count(0, 3);
    std::uniform_int_distribution<int> cond_kind(0, 3);
    std::uniform_int_distribution<std::uint32_t> small(0, 8);

    policy::PolicyRule r;
    r.action = policy::Action(action_dist(rng));
    r.event = policy::EventType(event_dist(rng));
    int n = cond_count(rng);
    for (int i = 0; i < n; ++i) {
        switch (cond_kind(rng)) {
        case 0: {
            // Narrow operand space so conditions actually match sometimes.
            Uuid u{};
            u.fill(std::uint8_t(small(rng)));
            r.conditions.push_back(policy::UuidEquals{u});
            break;
        }
        case 1:
            r.conditions.push_back(policy::SyscallNumberEquals{small(rng)});
            break;
        case 2: {
            Uuid u{};
            u.fill(std::uint8_t(small(rng)));
            r.conditions.push_back(policy::CallerUuidEquals{u});
            break;
        }
        default:
            r.conditions.push_back(policy::MinSizeBytes{small(rng)});
        }
    }
    return r;
}

std::vector<policy::PolicyRule> random_rules(Rng& rng, std::size_t max) {
    std::uniform_int_distribution<std::size_t> count(0, max);
    std::vector<policy::PolicyRule> rules(count(rng));
    for (auto& r : rules) r = random_rule(rng);
    return rules;
}

policy::EventContext random_context(Rng& rng) {
    std::uniform_int_distribution<int> event_dist(0, 6);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<std::uint32_t> small(0, 8);

    policy::EventContext ctx;
    ctx.event = policy::EventType(event_dist(rng));
    if (coin(rng)) {
        Uuid u{};
        u.fill(std::uint8_t(small(rng)));
        ctx.subject_uuid = u;
    }
    if (coin(rng)) {
        Uuid u{};
        u.fill(std::uint8_t(small(rng)));
        ctx.caller_uuid = u;
    }
    if (coin(rng)) ctx.syscall_number = small(rng);
    if (coin(rng)) ctx.object_size = small(rng);
    ctx.timestamp_ms = small(rng);
    return ctx;
}

} // namespace oracle
