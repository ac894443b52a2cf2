#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "pdrima/sml.hpp"

using namespace pdrima;
using namespace pdrima::sml;

namespace {

// Appends `n` random entries of mixed kinds to the log.
void append_random(oracle::Rng& rng, Sml& log, VpcrBank& bank, std::size_t n) {
    std::uniform_int_distribution<int> kind(0, 2);
    for (std::size_t i = 0; i < n; ++i) {
        Digest result = oracle::random_digest(rng);
        switch (kind(rng)) {
        case 0: {
            StaticEventData ed;
            ed.uuid = oracle::random_uuid(rng);
            ed.kind = measure::ObjectKind::UserTa;
            ed.version = std::uint32_t(rng() % 10);
            ed.measured = result;
            ed.appraisal = LoggedAppraisal::Trusted;
            log.append(bank, 2, policy::EventType::UserTaLoad,
                       encode_event_data(ed), result);
            break;
        }
        case 1: {
            DynamicEventData ed;
            ed.metadata.event = policy::EventType::Syscall;
            ed.metadata.syscall_number = std::uint32_t(rng() % 64);
            ed.metadata.timestamp_ms = i;
            ed.parameter_len = std::uint32_t(rng() % 128);
            ed.result_code = 0;
            ed.measured = result;
            log.append(bank, 3, policy::EventType::Syscall,
                       encode_event_data(ed), result);
            break;
        }
        default: {
            RemeasureEventData ed;
            ed.uuid = oracle::random_uuid(rng);
            ed.outcome = RemeasureLogOutcome::Passed;
            ed.measured = result;
            log.append(bank, 2, policy::EventType::ReMeasurement,
                       encode_event_data(ed), result);
        }
        }
    }
}

} // namespace

TEST_CASE("entry digest binds every field of the preimage") {
    Digest prev = oracle::sha256(std::vector<std::uint8_t>{1});
    Digest result = oracle::sha256(std::vector<std::uint8_t>{2});
    std::vector<std::uint8_t> ed = {9, 8, 7};

    Digest base = entry_digest(1, policy::EventType::Syscall, prev, ed, result);
    CHECK(base == entry_digest(1, policy::EventType::Syscall, prev, ed, result));
    CHECK(base != entry_digest(2, policy::EventType::Syscall, prev, ed, result));
    CHECK(base != entry_digest(1, policy::EventType::UserTaLoad, prev, ed, result));
    CHECK(base != entry_digest(1, policy::EventType::Syscall, result, ed, result));
    CHECK(base != entry_digest(1, policy::EventType::Syscall, prev, {}, result));
    CHECK(base != entry_digest(1, policy::EventType::Syscall, prev, ed, prev));
}

TEST_CASE("vpcr extend is H(old || m) and bounds-checked") {
    VpcrBank bank;
    Digest m = oracle::sha256(std::vector<std::uint8_t>{5});
    Digest after = bank.extend(0, m);
    CHECK(after == oracle::sha256_concat(Digest::zero().bytes, m.bytes));
    CHECK(bank.at(0) == after);
    CHECK(bank.at(1).is_zero());
    CHECK_THROWS_AS((void)bank.extend(4, m), IndexOutOfRange);
    CHECK_THROWS_AS((void)bank.at(4), IndexOutOfRange);
}

TEST_CASE("event data encodings round trip") {
    oracle::Rng rng(501);
    for (int i = 0; i < 100; ++i) {
        StaticEventData s;
        s.uuid = oracle::random_uuid(rng);
        s.kind = measure::ObjectKind(int(rng() % 3));
        s.version = std::uint32_t(rng());
        s.measured = oracle::random_digest(rng);
        s.appraisal = LoggedAppraisal(int(rng() % 5));
        auto back = decode_event_data(encode_event_data(s));
        REQUIRE(std::holds_alternative<StaticEventData>(back));
        auto& b = std::get<StaticEventData>(back);
        CHECK(b.uuid == s.uuid);
        CHECK(b.kind == s.kind);
        CHECK(b.version == s.version);
        CHECK(b.measured == s.measured);
        CHECK(b.appraisal == s.appraisal);
    }
}

TEST_CASE("appending chains heads and extends the bank in lockstep") {
    oracle::Rng rng(502);
    Sml log(64);
    VpcrBank bank;
    append_random(rng, log, bank, 30);

    CHECK(log.entry_count() == 30);
    CHECK(log.entries().front().header.prev_digest.is_zero());
    for (std::size_t i = 1; i < 30; ++i) {
        CHECK(log.entries()[i].header.prev_digest ==
              log.entries()[i - 1].header.digest);
    }
    CHECK(log.head_digest() == log.entries().back().header.digest);
    CHECK_FALSE(verify_chain(log.entries()).has_value());
    CHECK(replay_vpcrs(log.entries()) == bank.registers());
}

TEST_CASE("replay from scratch matches a live bank across random traces") {
    for (int trial = 0; trial < 50; ++trial) {
        oracle::Rng rng(600 + std::uint64_t(trial));
        Sml log(256);
        VpcrBank bank;
        std::uniform_int_distribution<std::size_t> n(1, 60);
        append_random(rng, log, bank, n(rng));
        CHECK(replay_vpcrs(log.entries()) == bank.registers());
    }
}

TEST_CASE("capacity check leaves log and bank untouched on failure") {
    oracle::Rng rng(503);
    Sml log(3);
    VpcrBank bank;
    append_random(rng, log, bank, 3);
    auto entries_before = log.entries();
    auto regs_before = bank.registers();
    Digest head_before = log.head_digest();

    StaticEventData ed;
    ed.measured = oracle::random_digest(rng);
    CHECK_THROWS_AS((void)log.append(bank, 2, policy::EventType::UserTaLoad,
                                     encode_event_data(ed), ed.measured),
                    CapacityExceeded);
    CHECK(log.entries() == entries_before);
    CHECK(bank.registers() == regs_before);
    CHECK(log.head_digest() == head_before);
}

TEST_CASE("every single-byte flip in any entry is detected") {
    oracle::Rng rng(504);
    Sml log(64);
    VpcrBank bank;
    append_random(rng, log, bank, 12);
    const auto& clean = log.entries();

    for (std::size_t e = 0; e < clean.size(); ++e) {
        // Flip one byte of each mutable region in turn.
        auto flip_and_check = [&](auto mutate) {
            auto entries = clean;
            mutate(entries[e]);
            auto broken = verify_chain(entries);
            REQUIRE(broken.has_value());
            CHECK_THROWS_AS((void)replay_vpcrs(entries), ChainBrokenError);
        };
        flip_and_check([](SmlEntry& x) { x.header.digest.bytes[0] ^= 1; });
        flip_and_check([](SmlEntry& x) { x.header.prev_digest.bytes[31] ^= 1; });
        flip_and_check([](SmlEntry& x) { x.result.bytes[7] ^= 1; });
        flip_and_check([](SmlEntry& x) { x.event_data[0] ^= 1; });
        flip_and_check([](SmlEntry& x) { x.size += 1; });
        flip_and_check([](SmlEntry& x) { x.header.vpcr_index ^= 1; });
    }
}

TEST_CASE("verify_chain reports the first broken index and reason") {
    oracle::Rng rng(505);
    Sml log(64);
    VpcrBank bank;
    append_random(rng, log, bank, 10);
    auto entries = log.entries();

    entries[4].size += 1;
    auto broken = verify_chain(entries);
    REQUIRE(broken.has_value());
    CHECK(broken->index == 4);
    CHECK(broken->reason == ChainFault::SizeMismatch);

    entries = log.entries();
    entries[6].header.prev_digest.bytes[0] ^= 0xff;
    broken = verify_chain(entries);
    REQUIRE(broken.has_value());
    CHECK(broken->index == 6);
    CHECK(broken->reason == ChainFault::PrevMismatch);

    entries = log.entries();
    entries[2].result.bytes[0] ^= 0xff;
    broken = verify_chain(entries);
    REQUIRE(broken.has_value());
    CHECK(broken->index == 2);
    CHECK(broken->reason == ChainFault::DigestMismatch);
}

TEST_CASE("select_entries partitions by filter") {
    oracle::Rng rng(506);
    Sml log(64);
    VpcrBank bank;
    append_random(rng, log, bank, 40);

    EntryFilter dynamic_only;
    dynamic_only.vpcr_index = 3;
    auto dyn = select_entries(log.entries(), dynamic_only);

    EntryFilter ta_class;
    ta_class.vpcr_index = 2;
    auto ta = select_entries(log.entries(), ta_class);
    CHECK(dyn.size() + ta.size() == log.entries().size());
    for (const auto& e : dyn) CHECK(e.header.vpcr_index == 3);

    EntryFilter remeasure;
    remeasure.event_type = policy::EventType::ReMeasurement;
    for (const auto& e : select_entries(log.entries(), remeasure))
        CHECK(e.header.event_type == policy::EventType::ReMeasurement);

    // Empty filter selects everything, order preserved.
    auto all = select_entries(log.entries(), {});
    CHECK(all == log.entries());
}

TEST_CASE("serialize/parse round trips byte-exactly and is deterministic") {
    oracle::Rng rng(507);
    Sml log(64);
    VpcrBank bank;
    append_random(rng, log, bank, 25);

    auto file1 = serialize_sml(log);
    auto file2 = serialize_sml(log);
    CHECK(file1 == file2);

    auto parsed = parse_sml(file1);
    CHECK(parsed.format_version == kSmlFormatVersion);
    CHECK(parsed.hash_alg_id == kHashAlgSha256);
    CHECK(parsed.head_digest == log.head_digest());
    CHECK(parsed.entries == log.entries());
}

TEST_CASE("parse rejects corrupted dumps") {
    oracle::Rng rng(508);
    Sml log(8);
    VpcrBank bank;
    append_random(rng, log, bank, 4);
    auto file = serialize_sml(log);

    auto bad_magic = file;
    bad_magic[0] ^= 0xff;
    CHECK_THROWS_AS((void)parse_sml(bad_magic), DecodeError);

    auto truncated = file;
    truncated.pop_back();
    CHECK_THROWS((void)parse_sml(truncated));

    // Head digest disagreeing with the last entry is rejected.
    auto bad_head = file;
    bad_head[10] ^= 0x01; // magic(4) + format(1) + alg(1) + count(4) = 10
    CHECK_THROWS((void)parse_sml(bad_head));
}

TEST_CASE("an empty log serializes and parses") {
    Sml log(8);
    auto parsed = parse_sml(serialize_sml(log));
    CHECK(parsed.entries.empty());
    CHECK(parsed.head_digest.is_zero());
}
