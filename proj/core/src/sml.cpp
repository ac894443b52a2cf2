#include "pdrima/sml.hpp"

#include <algorithm>

#include "pdrima/codec.hpp"

namespace pdrima::sml {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'D', 'S', 'M'};

constexpr std::uint8_t kTagStatic = 0x01;
constexpr std::uint8_t kTagDynamic = 0x02;
constexpr std::uint8_t kTagRemeasure = 0x03;

std::optional<Uuid> entry_uuid(const SmlEntry& e) {
    EventData ed = decode_event_data(e.event_data);
    if (auto* s = std::get_if<StaticEventData>(&ed)) return s->uuid;
    if (auto* r = std::get_if<RemeasureEventData>(&ed)) return r->uuid;
    auto& d = std::get<DynamicEventData>(ed);
    return d.metadata.subject_uuid ? d.metadata.subject_uuid : d.metadata.caller_uuid;
}

} // namespace

LoggedAppraisal logged_appraisal_from(appraise::AppraisalOutcome o) {
    switch (o) {
    case appraise::AppraisalOutcome::Trusted: return LoggedAppraisal::Trusted;
    case appraise::AppraisalOutcome::UntrustedHashMismatch:
        return LoggedAppraisal::HashMismatch;
    case appraise::AppraisalOutcome::UntrustedRollback:
        return LoggedAppraisal::Rollback;
    case appraise::AppraisalOutcome::UnknownComponent:
        return LoggedAppraisal::UnknownComponent;
    }
    return LoggedAppraisal::NotAppraised;
}

std::vector<std::uint8_t> encode_event_data(const EventData& ed) {
    Encoder e;
    if (auto* s = std::get_if<StaticEventData>(&ed)) {
        e.u8(kTagStatic);
        e.uuid(s->uuid);
        e.u8(std::uint8_t(s->kind));
        e.u32(s->version);
        e.digest(s->measured);
        e.u8(std::uint8_t(s->appraisal));
    } else if (auto* dyn = std::get_if<DynamicEventData>(&ed)) {
        e.u8(kTagDynamic);
        e.raw(measure::encode_syscall_metadata(dyn->metadata));
        e.u32(dyn->parameter_len);
        e.u32(dyn->result_code);
        e.digest(dyn->measured);
    } else {
        const auto& r = std::get<RemeasureEventData>(ed);
        e.u8(kTagRemeasure);
        e.uuid(r.uuid);
        e.u8(std::uint8_t(r.outcome));
        e.digest(r.measured);
    }
    return e.take();
}

EventData decode_event_data(std::span<const std::uint8_t> bytes) {
    Decoder d(bytes);
    std::uint8_t tag = d.u8();
    EventData out;
    switch (tag) {
    case kTagStatic: {
        StaticEventData s;
        s.uuid = d.uuid();
        std::uint8_t kind = d.u8();
        if (kind > std::uint8_t(measure::ObjectKind::UserTa))
            throw DecodeError("bad object kind");
        s.kind = measure::ObjectKind(kind);
        s.version = d.u32();
        s.measured = d.digest();
        std::uint8_t a = d.u8();
        if (a > std::uint8_t(LoggedAppraisal::UnknownComponent))
            throw DecodeError("bad appraisal code");
        s.appraisal = LoggedAppraisal(a);
        out = s;
        break;
    }
    case kTagDynamic: {
        DynamicEventData dyn;
        dyn.metadata.event = policy::event_type_from_code(d.u8());
        dyn.metadata.caller_uuid =
            d.optional<Uuid>([&] { return d.uuid(); });
        dyn.metadata.subject_uuid =
            d.optional<Uuid>([&] { return d.uuid(); });
        dyn.metadata.syscall_number =
            d.optional<std::uint32_t>([&] { return d.u32(); });
        dyn.metadata.timestamp_ms = d.u64();
        dyn.parameter_len = d.u32();
        dyn.result_code = d.u32();
        dyn.measured = d.digest();
        out = dyn;
        break;
    }
    case kTagRemeasure: {
        RemeasureEventData r;
        r.uuid = d.uuid();
        std::uint8_t o = d.u8();
        if (o > std::uint8_t(RemeasureLogOutcome::FailedAlert))
            throw DecodeError("bad re-measurement outcome");
        r.outcome = RemeasureLogOutcome(o);
        r.measured = d.digest();
        out = r;
        break;
    }
    default:
        throw DecodeError("unknown event data tag");
    }
    d.finish();
    return out;
}

Digest entry_digest(std::uint8_t vpcr_index, policy::EventType event_type,
                    const Digest& prev_digest,
                    std::span<const std::uint8_t> event_data,
                    const Digest& result) {
    Encoder e;
    e.u8(vpcr_index);
    e.u8(std::uint8_t(event_type));
    e.digest(prev_digest);
    e.bytes(event_data);
    e.digest(result);
    return hash(e.out());
}

const Digest& VpcrBank::at(std::uint8_t i) const {
    if (i > 3) throw IndexOutOfRange("vPCR index out of range");
    return regs_[i];
}

Digest VpcrBank::extend(std::uint8_t i, const Digest& m) {
    if (i > 3) throw IndexOutOfRange("vPCR index out of range");
    regs_[i] = hash_pair(regs_[i], m);
    return regs_[i];
}

Sml::Sml(std::uint32_t capacity) : capacity_(capacity) {
    entries_.reserve(capacity);
}

const SmlEntry& Sml::append(VpcrBank& bank, std::uint8_t vpcr_index,
                            policy::EventType event_type,
                            std::vector<std::uint8_t> event_data,
                            const Digest& result) {
    if (vpcr_index > 3) throw IndexOutOfRange("vPCR index out of range");
    if (entries_.size() >= capacity_)
        throw CapacityExceeded("SML entry budget exhausted");

    SmlEntry e;
    e.header.vpcr_index = vpcr_index;
    e.header.event_type = event_type;
    e.header.prev_digest = head_;
    e.size = std::uint32_t(event_data.size());
    e.result = result;
    e.event_data = std::move(event_data);
    e.header.digest = entry_digest(vpcr_index, event_type, e.header.prev_digest,
                                   e.event_data, e.result);

    entries_.push_back(std::move(e));
    head_ = entries_.back().header.digest;
    bank.extend(vpcr_index, head_);
    return entries_.back();
}

std::optional<BrokenAt> verify_chain(const std::vector<SmlEntry>& entries) {
    Digest prev = Digest::zero();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.header.prev_digest != prev)
            return BrokenAt{i, ChainFault::PrevMismatch};
        if (e.size != e.event_data.size())
            return BrokenAt{i, ChainFault::SizeMismatch};
        Digest expect = entry_digest(e.header.vpcr_index, e.header.event_type,
                                     e.header.prev_digest, e.event_data, e.result);
        if (e.header.digest != expect)
            return BrokenAt{i, ChainFault::DigestMismatch};
        prev = e.header.digest;
    }
    return std::nullopt;
}

std::array<Digest, 4> replay_vpcrs(const std::vector<SmlEntry>& entries) {
    if (verify_chain(entries))
        throw ChainBrokenError("cannot replay a broken chain");
    VpcrBank bank;
    for (const auto& e : entries)
        bank.extend(e.header.vpcr_index, e.header.digest);
    return bank.registers();
}

std::vector<SmlEntry> select_entries(const std::vector<SmlEntry>& entries,
                                     const EntryFilter& filter) {
    std::vector<SmlEntry> out;
    for (const auto& e : entries) {
        if (filter.vpcr_index && e.header.vpcr_index != *filter.vpcr_index)
            continue;
        if (filter.event_type && e.header.event_type != *filter.event_type)
            continue;
        if (filter.uuid) {
            auto u = entry_uuid(e);
            if (!u || *u != *filter.uuid) continue;
        }
        out.push_back(e);
    }
    return out;
}

std::vector<std::uint8_t> encode_entry(const SmlEntry& e) {
    Encoder enc;
    enc.u8(e.header.vpcr_index);
    enc.u8(std::uint8_t(e.header.event_type));
    enc.digest(e.header.digest);
    enc.digest(e.header.prev_digest);
    enc.bytes(e.event_data);
    enc.u32(e.size);
    enc.digest(e.result);
    return enc.take();
}

SmlEntry decode_entry(Decoder& d) {
    SmlEntry e;
    std::uint8_t vpcr = d.u8();
    if (vpcr > 3) throw DecodeError("vPCR index out of range");
    e.header.vpcr_index = vpcr;
    e.header.event_type = policy::event_type_from_code(d.u8());
    e.header.digest = d.digest();
    e.header.prev_digest = d.digest();
    e.event_data = d.bytes();
    e.size = d.u32();
    e.result = d.digest();
    return e;
}

std::vector<std::uint8_t> encode_entry_list(const std::vector<SmlEntry>& entries) {
    Encoder enc;
    enc.u32(std::uint32_t(entries.size()));
    for (const auto& e : entries) enc.raw(encode_entry(e));
    return enc.take();
}

std::vector<SmlEntry> decode_entry_list(Decoder& d) {
    std::uint32_t count = d.u32();
    std::vector<SmlEntry> out;
    out.reserve(std::min<std::uint32_t>(count, 65536));
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(decode_entry(d));
    return out;
}

std::vector<std::uint8_t> serialize_sml(const Sml& sml) {
    Encoder e;
    e.raw(kMagic);
    e.u8(kSmlFormatVersion);
    e.u8(kHashAlgSha256);
    e.u32(sml.entry_count());
    e.digest(sml.head_digest());
    for (const auto& entry : sml.entries()) e.raw(encode_entry(entry));
    return e.take();
}

SmlFile parse_sml(std::span<const std::uint8_t> file) {
    Decoder d(file);
    auto magic = d.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic))
        throw DecodeError("bad SML magic");
    SmlFile f;
    f.format_version = d.u8();
    if (f.format_version != kSmlFormatVersion)
        throw DecodeError("unsupported SML format version");
    f.hash_alg_id = d.u8();
    if (f.hash_alg_id != kHashAlgSha256)
        throw DecodeError("unsupported hash algorithm");
    std::uint32_t count = d.u32();
    f.head_digest = d.digest();
    f.entries.reserve(std::min<std::uint32_t>(count, 65536));
    for (std::uint32_t i = 0; i < count; ++i)
        f.entries.push_back(decode_entry(d));
    d.finish();
    Digest head = f.entries.empty() ? Digest::zero()
                                    : f.entries.back().header.digest;
    if (head != f.head_digest)
        throw DecodeError("head digest does not match entry list");
    return f;
}

} // namespace pdrima::sml
