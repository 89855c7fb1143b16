#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "dvs/events.hpp"

namespace dvs {

struct TruncatedFile : std::runtime_error {
    explicit TruncatedFile(const std::string& what) : std::runtime_error(what) {}
};

struct BadMagic : std::runtime_error {
    explicit BadMagic(const std::string& what) : std::runtime_error(what) {}
};

struct FileOutOfBounds : std::runtime_error {
    explicit FileOutOfBounds(const std::string& what) : std::runtime_error(what) {}
};

/// EVT1 portable event file.
///
/// Header: 8-byte magic "EVT1\0\0\0\0", then little-endian u16 width,
/// u16 height, u32 reserved (zero), u64 duration_us, u64 event_count.
/// Records: event_count x (u16 x, u16 y, u8 polarity, u8 pad, u32 timestamp_us).
/// write_evt followed by read_evt reproduces the stream bit-exactly.
EventStream read_evt(const std::filesystem::path& path);
void write_evt(const EventStream& stream, const std::filesystem::path& path);

/// Decodes a packed 5-byte-per-event recording from a 34x34 ATIS sensor:
/// byte0 = x, byte1 = y, byte2 bit7 = polarity and bits 6..0 = timestamp
/// bits 22..16, byte3 = timestamp bits 15..8, byte4 = timestamp bits 7..0.
/// Timestamps are microseconds.
EventStream load_nmnist(const std::filesystem::path& path);

/// Dataset directory layout: one subdirectory per integer class label,
/// one EVT1 file per sample.
void save_dataset_dir(const StreamDataset& dataset, const std::filesystem::path& dir);
StreamDataset load_dataset_dir(const std::filesystem::path& dir);

}  // namespace dvs
