#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dvs/io.hpp"
#include "dvs/synth.hpp"

using namespace dvs;

namespace {

std::filesystem::path temp_path(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "dvskit_io_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

EventStream three_event_stream() {
    EventStream s;
    s.width = 34;
    s.height = 34;
    s.duration_us = 5000;
    s.events = {{1, 2, 1, 100}, {30, 33, 0, 2500}, {0, 0, 1, 5000}};
    return s;
}

}  // namespace

TEST_CASE("EVT1 write/read round-trips a small stream") {
    const auto path = temp_path("roundtrip.evt1");
    const EventStream original = three_event_stream();
    write_evt(original, path);
    CHECK(read_evt(path) == original);
}

TEST_CASE("EVT1 rewrite is byte-identical") {
    const auto path_a = temp_path("bytes_a.evt1");
    const auto path_b = temp_path("bytes_b.evt1");
    const EventStream original = three_event_stream();
    write_evt(original, path_a);
    write_evt(read_evt(path_a), path_b);
    CHECK(read_bytes(path_a) == read_bytes(path_b));
}

TEST_CASE("EVT1 with zero events reads back as an empty stream") {
    const auto path = temp_path("empty.evt1");
    EventStream s;
    s.width = 16;
    s.height = 16;
    s.duration_us = 1234;
    write_evt(s, path);
    const EventStream loaded = read_evt(path);
    CHECK(loaded.events.empty());
    CHECK(loaded.duration_us == 1234);
}

TEST_CASE("EVT1 rejects a wrong magic") {
    const auto path = temp_path("badmagic.evt1");
    std::vector<std::uint8_t> bytes(32, 0);
    bytes[0] = 'X';
    write_bytes(path, bytes);
    CHECK_THROWS_AS(read_evt(path), BadMagic);
}

TEST_CASE("EVT1 rejects truncated headers and records") {
    const auto path = temp_path("trunc.evt1");
    write_bytes(path, {'E', 'V', 'T', '1', 0, 0, 0, 0, 1});
    CHECK_THROWS_AS(read_evt(path), TruncatedFile);

    const auto full = temp_path("trunc2.evt1");
    write_evt(three_event_stream(), full);
    std::vector<std::uint8_t> bytes = read_bytes(full);
    bytes.resize(bytes.size() - 3);
    write_bytes(full, bytes);
    CHECK_THROWS_AS(read_evt(full), TruncatedFile);
}

TEST_CASE("hand-packed 5-byte record decodes to the expected event") {
    // Packed independently of the loader: x=10, y=20, polarity=1, t=1000us.
    const std::uint32_t t = 1000;
    std::vector<std::uint8_t> bytes = {
        10,
        20,
        static_cast<std::uint8_t>((1u << 7) | ((t >> 16) & 0x7F)),
        static_cast<std::uint8_t>((t >> 8) & 0xFF),
        static_cast<std::uint8_t>(t & 0xFF),
    };
    const auto path = temp_path("one.nmnist");
    write_bytes(path, bytes);
    const EventStream stream = load_nmnist(path);
    REQUIRE(stream.events.size() == 1);
    CHECK(stream.events[0] == Event{10, 20, 1, 1000});
    CHECK(stream.width == 34);
    CHECK(stream.height == 34);
}

TEST_CASE("a 23-bit timestamp with polarity 0 decodes correctly") {
    const std::uint32_t t = 0x7A1B2C;  // needs all 23 bits
    std::vector<std::uint8_t> bytes = {
        33,
        0,
        static_cast<std::uint8_t>((t >> 16) & 0x7F),
        static_cast<std::uint8_t>((t >> 8) & 0xFF),
        static_cast<std::uint8_t>(t & 0xFF),
    };
    const auto path = temp_path("wide.nmnist");
    write_bytes(path, bytes);
    const EventStream stream = load_nmnist(path);
    REQUIRE(stream.events.size() == 1);
    CHECK(stream.events[0].polarity == 0);
    CHECK(stream.events[0].timestamp_us == static_cast<std::int64_t>(t));
}

TEST_CASE("empty and ragged files are truncated for the packed loader") {
    const auto path = temp_path("empty.nmnist");
    write_bytes(path, {});
    CHECK_THROWS_AS(load_nmnist(path), TruncatedFile);

    write_bytes(path, {1, 2, 3});
    CHECK_THROWS_AS(load_nmnist(path), TruncatedFile);
}

TEST_CASE("packed records outside the 34x34 sensor are rejected") {
    const auto path = temp_path("oob.nmnist");
    write_bytes(path, {34, 0, 0, 0, 1});
    CHECK_THROWS_AS(load_nmnist(path), FileOutOfBounds);
}

TEST_CASE("dataset directory round-trips streams, labels and order") {
    SynthConfig config;
    config.class_count = 3;
    config.samples_per_class = 4;
    config.sensor_size = 16;
    config.duration_us = 50000;
    config.noise_rate = 1.0;
    const StreamDataset dataset = synth_dataset(config, 21);

    const auto dir = temp_path("dataset");
    std::filesystem::remove_all(dir);
    save_dataset_dir(dataset, dir);
    const StreamDataset loaded = load_dataset_dir(dir);

    REQUIRE(loaded.streams.size() == dataset.streams.size());
    CHECK(loaded.class_count == dataset.class_count);
    CHECK(loaded.labels == dataset.labels);
    for (std::size_t i = 0; i < dataset.streams.size(); ++i) {
        CHECK(loaded.streams[i] == dataset.streams[i]);
    }
}

TEST_CASE("class directories sort numerically, not lexically") {
    StreamDataset dataset;
    dataset.class_count = 12;
    EventStream s;
    s.width = 8;
    s.height = 8;
    s.duration_us = 10;
    for (int label : {0, 2, 10, 11}) {
        dataset.streams.push_back(s);
        dataset.labels.push_back(label);
    }
    const auto dir = temp_path("dataset_sort");
    std::filesystem::remove_all(dir);
    save_dataset_dir(dataset, dir);
    const StreamDataset loaded = load_dataset_dir(dir);
    CHECK(loaded.labels == std::vector<int>{0, 2, 10, 11});
}
