#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pdrima/appraise.hpp"
#include "pdrima/crypto.hpp"
#include "pdrima/measure.hpp"
#include "pdrima/policy.hpp"

namespace pdrima::sml {

struct CapacityExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChainBrokenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint8_t kHashAlgSha256 = 0x01;
constexpr std::uint8_t kSmlFormatVersion = 0x01;
constexpr std::uint32_t kDefaultCapacity = 4096;

/// Device-side appraisal outcome recorded in a static entry.
enum class LoggedAppraisal : std::uint8_t {
    NotAppraised = 0,
    Trusted = 1,
    HashMismatch = 2,
    Rollback = 3,
    UnknownComponent = 4,
};

LoggedAppraisal logged_appraisal_from(appraise::AppraisalOutcome o);

struct StaticEventData {
    Uuid uuid{};
    measure::ObjectKind kind = measure::ObjectKind::UserTa;
    std::uint32_t version = 0;
    Digest measured;
    LoggedAppraisal appraisal = LoggedAppraisal::NotAppraised;
};

/// Summary of a dynamic measurement: D1 metadata plus parameter length
/// and result code. The full parameter bytes stay out of the log; the
/// result digest binds them.
struct DynamicEventData {
    measure::SyscallMetadata metadata;
    std::uint32_t parameter_len = 0;
    std::uint32_t result_code = 0;
    Digest measured;
};

enum class RemeasureLogOutcome : std::uint8_t {
    Passed = 0,
    FailedBlock = 1,
    FailedAlert = 2,
};

struct RemeasureEventData {
    Uuid uuid{};
    RemeasureLogOutcome outcome = RemeasureLogOutcome::Passed;
    Digest measured;
};

using EventData = std::variant<StaticEventData, DynamicEventData, RemeasureEventData>;

std::vector<std::uint8_t> encode_event_data(const EventData& ed);
EventData decode_event_data(std::span<const std::uint8_t> bytes);

struct SeHeader {
    std::uint8_t vpcr_index = 0; // 0..3
    policy::EventType event_type = policy::EventType::KernelLoad;
    Digest digest;      // authenticates this entry
    Digest prev_digest; // zero32 for the first entry

    bool operator==(const SeHeader&) const = default;
};

struct SmlEntry {
    SeHeader header;
    std::vector<std::uint8_t> event_data;
    std::uint32_t size = 0; // == event_data length
    Digest result;          // the measurement result for this event

    bool operator==(const SmlEntry&) const = default;
};

/// Preimage: (vpcr_index, event_type, prev_digest, event_data, result),
/// canonically encoded in that order.
Digest entry_digest(std::uint8_t vpcr_index, policy::EventType event_type,
                    const Digest& prev_digest,
                    std::span<const std::uint8_t> event_data,
                    const Digest& result);

/// Four software registers; 0=kernel, 1=static components, 2=user-TAs,
/// 3=dynamic measurements.
class VpcrBank {
public:
    const std::array<Digest, 4>& registers() const { return regs_; }
    const Digest& at(std::uint8_t i) const;
    /// regs[i] = H(old || m); throws IndexOutOfRange.
    Digest extend(std::uint8_t i, const Digest& m);

private:
    std::array<Digest, 4> regs_{};
};

/// Append-only hash-chained log with pre-allocated entry budget.
class Sml {
public:
    explicit Sml(std::uint32_t capacity = kDefaultCapacity);

    const std::vector<SmlEntry>& entries() const { return entries_; }
    std::uint32_t entry_count() const { return std::uint32_t(entries_.size()); }
    std::uint32_t capacity() const { return capacity_; }
    const Digest& head_digest() const { return head_; }

    /// Builds, chains and appends one entry and extends the paired bank.
    /// Throws CapacityExceeded; on throw, log and bank are unchanged.
    const SmlEntry& append(VpcrBank& bank, std::uint8_t vpcr_index,
                           policy::EventType event_type,
                           std::vector<std::uint8_t> event_data,
                           const Digest& result);

private:
    std::uint32_t capacity_;
    std::vector<SmlEntry> entries_;
    Digest head_; // zero32 while empty
};

enum class ChainFault : std::uint8_t {
    PrevMismatch = 0,
    DigestMismatch = 1,
    SizeMismatch = 2,
};

struct BrokenAt {
    std::size_t index;
    ChainFault reason;
};

/// Batch verification: walks the chain, recomputes digests, checks size
/// consistency; reports the first failure. Ok == nullopt.
std::optional<BrokenAt> verify_chain(const std::vector<SmlEntry>& entries);

/// Replays all entries from four zero registers; throws ChainBrokenError
/// if verify_chain fails.
std::array<Digest, 4> replay_vpcrs(const std::vector<SmlEntry>& entries);

struct EntryFilter {
    std::optional<std::uint8_t> vpcr_index;
    std::optional<Uuid> uuid;
    std::optional<policy::EventType> event_type;
};

/// Order-preserving selection for selective checks.
std::vector<SmlEntry> select_entries(const std::vector<SmlEntry>& entries,
                                     const EntryFilter& filter);

std::vector<std::uint8_t> encode_entry(const SmlEntry& e);
SmlEntry decode_entry(Decoder& d);

std::vector<std::uint8_t> encode_entry_list(const std::vector<SmlEntry>& entries);
std::vector<SmlEntry> decode_entry_list(Decoder& d);

/// "PDSM" dump: magic + format version + hash alg id + count + head
/// digest + entries.
std::vector<std::uint8_t> serialize_sml(const Sml& sml);
struct SmlFile {
    std::uint8_t format_version;
    std::uint8_t hash_alg_id;
    Digest head_digest;
    std::vector<SmlEntry> entries;
};
SmlFile parse_sml(std::span<const std::uint8_t> file);

} // namespace pdrima::sml
