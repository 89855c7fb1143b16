#include "dvs/io.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace dvs {

namespace {

constexpr std::array<char, 8> kEvtMagic = {'E', 'V', 'T', '1', 0, 0, 0, 0};
constexpr std::size_t kEvtHeaderSize = 8 + 2 + 2 + 4 + 8 + 8;
constexpr std::size_t kEvtRecordSize = 2 + 2 + 1 + 1 + 4;
constexpr std::size_t kNmnistRecordSize = 5;
constexpr int kNmnistSensorSize = 34;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

template <typename T>
T get_le(const std::uint8_t* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(p[i]) << (8 * i);
    }
    return value;
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

EventStream read_evt(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_all(path);
    if (bytes.size() < kEvtHeaderSize) {
        throw TruncatedFile("EVT1 header truncated: " + path.string());
    }
    if (std::memcmp(bytes.data(), kEvtMagic.data(), kEvtMagic.size()) != 0) {
        throw BadMagic("not an EVT1 file: " + path.string());
    }
    EventStream stream;
    stream.width = get_le<std::uint16_t>(bytes.data() + 8);
    stream.height = get_le<std::uint16_t>(bytes.data() + 10);
    stream.duration_us = static_cast<std::int64_t>(get_le<std::uint64_t>(bytes.data() + 16));
    const std::uint64_t count = get_le<std::uint64_t>(bytes.data() + 24);

    if (bytes.size() < kEvtHeaderSize + count * kEvtRecordSize) {
        throw TruncatedFile("EVT1 records truncated: " + path.string());
    }
    stream.events.reserve(count);
    const std::uint8_t* p = bytes.data() + kEvtHeaderSize;
    for (std::uint64_t i = 0; i < count; ++i, p += kEvtRecordSize) {
        Event e;
        e.x = get_le<std::uint16_t>(p);
        e.y = get_le<std::uint16_t>(p + 2);
        e.polarity = p[4];
        e.timestamp_us = get_le<std::uint32_t>(p + 6);
        if (e.x >= stream.width || e.y >= stream.height) {
            throw FileOutOfBounds("EVT1 event outside sensor bounds: " + path.string());
        }
        stream.events.push_back(e);
    }
    return stream;
}

void write_evt(const EventStream& stream, const std::filesystem::path& path) {
    require_valid(stream);
    if (stream.duration_us > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max())) {
        throw std::invalid_argument("EVT1 stores 32-bit timestamps; stream too long");
    }
    std::vector<std::uint8_t> bytes;
    bytes.reserve(kEvtHeaderSize + stream.events.size() * kEvtRecordSize);
    bytes.insert(bytes.end(), kEvtMagic.begin(), kEvtMagic.end());
    put_le<std::uint16_t>(bytes, stream.width);
    put_le<std::uint16_t>(bytes, stream.height);
    put_le<std::uint32_t>(bytes, 0);  // reserved
    put_le<std::uint64_t>(bytes, static_cast<std::uint64_t>(stream.duration_us));
    put_le<std::uint64_t>(bytes, stream.events.size());
    for (const Event& e : stream.events) {
        put_le<std::uint16_t>(bytes, e.x);
        put_le<std::uint16_t>(bytes, e.y);
        bytes.push_back(e.polarity);
        bytes.push_back(0);  // pad
        put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(e.timestamp_us));
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("short write to " + path.string());
    }
}

EventStream load_nmnist(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_all(path);
    if (bytes.empty() || bytes.size() % kNmnistRecordSize != 0) {
        throw TruncatedFile("record stream truncated: " + path.string());
    }
    EventStream stream;
    stream.width = kNmnistSensorSize;
    stream.height = kNmnistSensorSize;
    stream.events.reserve(bytes.size() / kNmnistRecordSize);

    for (std::size_t off = 0; off < bytes.size(); off += kNmnistRecordSize) {
        const std::uint8_t* p = bytes.data() + off;
        Event e;
        e.x = p[0];
        e.y = p[1];
        e.polarity = static_cast<std::uint8_t>(p[2] >> 7);
        e.timestamp_us = (static_cast<std::int64_t>(p[2] & 0x7F) << 16) |
                         (static_cast<std::int64_t>(p[3]) << 8) | static_cast<std::int64_t>(p[4]);
        if (e.x >= stream.width || e.y >= stream.height) {
            throw FileOutOfBounds("event outside 34x34 sensor: " + path.string());
        }
        stream.events.push_back(e);
    }
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp_us < b.timestamp_us; });
    stream.duration_us = stream.events.empty() ? 0 : stream.events.back().timestamp_us;
    return stream;
}

void save_dataset_dir(const StreamDataset& dataset, const std::filesystem::path& dir) {
    if (dataset.streams.size() != dataset.labels.size()) {
        throw std::invalid_argument("dataset streams/labels size mismatch");
    }
    std::filesystem::create_directories(dir);
    std::vector<int> per_class_index(static_cast<std::size_t>(dataset.class_count), 0);
    for (std::size_t i = 0; i < dataset.streams.size(); ++i) {
        const int label = dataset.labels[i];
        if (label < 0 || label >= dataset.class_count) {
            throw std::invalid_argument("label outside [0, class_count)");
        }
        const std::filesystem::path class_dir = dir / std::to_string(label);
        std::filesystem::create_directories(class_dir);
        char name[32];
        std::snprintf(name, sizeof(name), "s%04d.evt1", per_class_index[label]++);
        write_evt(dataset.streams[i], class_dir / name);
    }
}

StreamDataset load_dataset_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("dataset directory not found: " + dir.string());
    }
    std::vector<std::pair<int, std::filesystem::path>> classes;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        const std::string name = entry.path().filename().string();
        try {
            classes.emplace_back(std::stoi(name), entry.path());
        } catch (const std::exception&) {
            throw std::runtime_error("non-numeric class directory: " + name);
        }
    }
    std::sort(classes.begin(), classes.end());

    StreamDataset dataset;
    for (const auto& [label, class_dir] : classes) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(class_dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            dataset.streams.push_back(read_evt(file));
            dataset.labels.push_back(label);
        }
        dataset.class_count = std::max(dataset.class_count, label + 1);
    }
    return dataset;
}

}  // namespace dvs
