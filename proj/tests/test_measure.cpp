#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracle.hpp"
#include "pdrima/measure.hpp"

using namespace pdrima;
using namespace pdrima::measure;

TEST_CASE("empty segment list is rejected") {
    CHECK_THROWS_AS((void)measure_segments({}), EmptySegmentList);
}

TEST_CASE("one empty segment hashes to H(zero32 || H(empty))") {
    Digest empty_hash = hash(std::vector<std::uint8_t>{});
    Digest want = hash_pair(Digest::zero(), empty_hash);
    CHECK(measure_segments({{"text", {}}}) == want);
}

TEST_CASE("segment chain matches the independent oracle") {
    std::vector<Segment> segs = {{"a", {'a', 'b', 'c'}}, {"b", {'d', 'e', 'f'}}};
    CHECK(measure_segments(segs) == oracle::measure_segments(segs));

    oracle::Rng rng(301);
    for (int i = 0; i < 200; ++i) {
        std::uniform_int_distribution<std::size_t> n(1, 16);
        auto random = oracle::random_segments(rng, n(rng), 4096);
        CHECK(measure_segments(random) == oracle::measure_segments(random));
    }
}

TEST_CASE("segment order matters") {
    oracle::Rng rng(302);
    for (int i = 0; i < 100; ++i) {
        auto segs = oracle::random_segments(rng, 2, 64);
        if (segs[0].data == segs[1].data) continue;
        std::vector<Segment> swapped = {segs[1], segs[0]};
        CHECK(measure_segments(segs) != measure_segments(swapped));
    }
}

TEST_CASE("syscall digest binds all three parts") {
    SyscallRecord rec;
    rec.d1_metadata.event = policy::EventType::Syscall;
    rec.d1_metadata.syscall_number = 4;
    rec.d1_metadata.timestamp_ms = 1000;
    rec.d2_parameters = {1, 2, 3};
    rec.d3_result = 0;

    CHECK(measure_syscall(rec) == measure_syscall(rec));

    auto other = rec;
    other.d3_result = 1;
    CHECK(measure_syscall(rec) != measure_syscall(other));

    auto params = rec;
    params.d2_parameters = {1, 2, 4};
    CHECK(measure_syscall(rec) != measure_syscall(params));
}

TEST_CASE("syscall digest matches a from-scratch oracle") {
    SyscallRecord rec;
    rec.d1_metadata.event = policy::EventType::TaInvocation;
    rec.d1_metadata.caller_uuid = Uuid{};
    rec.d1_metadata.timestamp_ms = 42;
    rec.d2_parameters = {0xde, 0xad};
    rec.d3_result = 7;

    // Concatenate the three canonical encodings by hand and hash once.
    Encoder e;
    e.raw(encode_syscall_metadata(rec.d1_metadata));
    e.bytes(rec.d2_parameters);
    e.u32(rec.d3_result);
    CHECK(measure_syscall(rec) == oracle::sha256(e.out()));
}

TEST_CASE("syscall digests do not collide across sampled records") {
    oracle::Rng rng(303);
    std::set<Digest> seen;
    int distinct = 0;
    for (int i = 0; i < 500; ++i) {
        SyscallRecord rec;
        rec.d1_metadata.event = policy::EventType::Syscall;
        rec.d1_metadata.syscall_number = std::uint32_t(i);
        rec.d1_metadata.timestamp_ms = std::uint64_t(i) * 3;
        rec.d2_parameters = oracle::random_bytes(rng, 32);
        rec.d3_result = std::uint32_t(rng() % 4);
        if (seen.insert(measure_syscall(rec)).second) ++distinct;
    }
    CHECK(distinct == 500);
}

TEST_CASE("static measurement bypasses without a matching rule") {
    MeasurableObject obj;
    obj.kind = ObjectKind::Kernel;
    obj.segments = {{"text", {1, 2, 3}}};
    auto empty = policy::load_policy(policy::compile_policy({}));
    auto out = static_measure(obj, empty, 0);
    CHECK_FALSE(out.logged);
}

TEST_CASE("static measurement honors the matched rule's action") {
    MeasurableObject obj;
    obj.kind = ObjectKind::Kernel;
    obj.segments = {{"text", {1, 2, 3}}};

    auto measure_only = policy::load_policy(policy::compile_policy(
        {{policy::Action::Measure, policy::EventType::KernelLoad, {}}}));
    auto out = static_measure(obj, measure_only, 0);
    CHECK(out.logged);
    CHECK_FALSE(out.appraisal_required);
    CHECK(out.digest == measure_segments(obj.segments));

    auto appraise_set = policy::load_policy(policy::compile_policy(
        {{policy::Action::Appraise, policy::EventType::KernelLoad, {}}}));
    CHECK(static_measure(obj, appraise_set, 0).appraisal_required);
}

TEST_CASE("TA properties fold in as the synthetic trailing segment") {
    MeasurableObject plain;
    plain.kind = ObjectKind::UserTa;
    plain.segments = {{"text", {5, 6}}};

    MeasurableObject with_props = plain;
    with_props.properties = {{"vendor", "acme"}};

    Digest d_plain = measure_segments(measured_segments(plain));
    Digest d_props = measure_segments(measured_segments(with_props));
    CHECK(d_plain != d_props);

    // Oracle recomputation with the props segment appended by hand.
    auto segs = plain.segments;
    segs.push_back(properties_segment(with_props.properties));
    CHECK(d_props == oracle::measure_segments(segs));
    CHECK(d_plain == oracle::measure_segments(plain.segments));
}

TEST_CASE("re-measurement due check is strict") {
    MeasurableObject obj;
    obj.segments = {{"text", {1, 2, 3}}};

    RemeasureState st;
    st.baseline = measure_segments(obj.segments);
    st.last_measured_ms = 100;
    st.interval_ms = 50;

    CHECK(maybe_remeasure(st, obj, 149).result == RemeasureResult::NotDue);
    CHECK(maybe_remeasure(st, obj, 150).result == RemeasureResult::NotDue);
    CHECK(maybe_remeasure(st, obj, 151).result == RemeasureResult::Passed);
    // Timer restarted at 151.
    CHECK(st.last_measured_ms == 151);
    CHECK(maybe_remeasure(st, obj, 201).result == RemeasureResult::NotDue);
    CHECK(maybe_remeasure(st, obj, 202).result == RemeasureResult::Passed);
}

TEST_CASE("unmodified object always passes and keeps its baseline") {
    MeasurableObject obj;
    obj.segments = {{"text", {9, 9, 9}}, {"data", {1}}};
    RemeasureState st;
    st.baseline = measure_segments(obj.segments);
    st.interval_ms = 10;
    Digest baseline = st.baseline;

    for (std::uint64_t t = 11; t < 200; t += 11) {
        CHECK(maybe_remeasure(st, obj, t).result == RemeasureResult::Passed);
        CHECK(st.baseline == baseline);
    }
}

TEST_CASE("every single-byte flip in any segment fails re-measurement") {
    MeasurableObject obj;
    obj.segments = {{"text", {1, 2, 3, 4}}, {"data", {5, 6}}};
    RemeasureState st;
    st.baseline = measure_segments(obj.segments);
    st.interval_ms = 1;
    st.on_failure = FailureResponse::Block;

    for (std::size_t s = 0; s < obj.segments.size(); ++s) {
        for (std::size_t i = 0; i < obj.segments[s].data.size(); ++i) {
            for (int bit = 0; bit < 8; ++bit) {
                auto tampered = obj;
                tampered.segments[s].data[i] ^= std::uint8_t(1 << bit);
                RemeasureState copy = st;
                auto out = maybe_remeasure(copy, tampered, 100);
                CHECK(out.result == RemeasureResult::Failed);
                CHECK(out.response == FailureResponse::Block);
                // A failed re-measurement does not restart the timer.
                CHECK(copy.last_measured_ms == st.last_measured_ms);
            }
        }
    }
}

TEST_CASE("wrong target is rejected") {
    MeasurableObject obj;
    obj.uuid.fill(1);
    obj.segments = {{"text", {1}}};
    RemeasureState st;
    st.target_uuid.fill(2);
    st.interval_ms = 1;
    CHECK_THROWS_AS((void)maybe_remeasure(st, obj, 10), UnknownTarget);
}
