#include "dvs/filters.hpp"

#include <algorithm>
#include <stdexcept>

namespace dvs {

EventStream background_activity_filter(const EventStream& stream, const BafParams& params) {
    if (params.spatial_radius < 1 || params.time_threshold_us <= 0) {
        throw std::invalid_argument("invalid BAF parameters: need S >= 1 and T > 0");
    }
    require_valid(stream);

    const int w = stream.width;
    const int h = stream.height;
    const int s = params.spatial_radius;
    TimestampMap map(w, h);

    EventStream out;
    out.width = stream.width;
    out.height = stream.height;
    out.duration_us = stream.duration_us;

    for (const Event& e : stream.events) {
        const int x = e.x;
        const int y = e.y;
        // Stamp the neighbourhood first; the event's own keep/drop test reads
        // only what earlier events (or same-timestamp predecessors) wrote.
        const int x_lo = std::max(0, x - s);
        const int x_hi = std::min(w - 1, x + s);
        const int y_lo = std::max(0, y - s);
        const int y_hi = std::min(h - 1, y + s);
        for (int i = x_lo; i <= x_hi; ++i) {
            for (int j = y_lo; j <= y_hi; ++j) {
                if (i == x && j == y) continue;
                map.at(i, j) = e.timestamp_us;
            }
        }
        if (e.timestamp_us - map.at(x, y) <= params.time_threshold_us) {
            out.events.push_back(e);
        }
    }
    return out;
}

MaskFilterResult mask_filter(const EventStream& stream, const MfParams& params) {
    require_valid(stream);

    MaskFilterResult result;
    result.mask.width = stream.width;
    result.mask.height = stream.height;
    result.mask.activity.assign(static_cast<std::size_t>(stream.width) * stream.height, 0);
    result.mask.masked.assign(static_cast<std::size_t>(stream.width) * stream.height, 0);

    for (const Event& e : stream.events) {
        ++result.mask.activity[static_cast<std::size_t>(e.x) * stream.height + e.y];
    }
    for (std::size_t i = 0; i < result.mask.activity.size(); ++i) {
        result.mask.masked[i] = result.mask.activity[i] > params.activity_threshold ? 1 : 0;
    }

    result.stream.width = stream.width;
    result.stream.height = stream.height;
    result.stream.duration_us = stream.duration_us;
    for (const Event& e : stream.events) {
        if (!result.mask.masked_at(e.x, e.y)) {
            result.stream.events.push_back(e);
        }
    }
    return result;
}

FilterSpec FilterSpec::parse(const std::string& text) {
    auto fail = [&]() -> void {
        throw std::invalid_argument("bad filter spec '" + text +
                                    "' (expected none, mf:T=<n> or baf:S=<n>,T=<n>)");
    };
    if (text == "none" || text.empty()) {
        return none();
    }
    const std::size_t colon = text.find(':');
    const std::string head = text.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);

    auto parse_kv = [&](const std::string& part, const char* key) -> std::int64_t {
        const std::size_t eq = part.find('=');
        if (eq == std::string::npos || part.substr(0, eq) != key) fail();
        try {
            return std::stoll(part.substr(eq + 1));
        } catch (const std::exception&) {
            fail();
        }
        return 0;
    };

    if (head == "mf") {
        if (args.empty()) fail();
        MfParams p;
        p.activity_threshold = parse_kv(args, "T");
        if (p.activity_threshold < 0) fail();
        return make_mf(p);
    }
    if (head == "baf") {
        const std::size_t comma = args.find(',');
        if (comma == std::string::npos) fail();
        BafParams p;
        p.spatial_radius = static_cast<int>(parse_kv(args.substr(0, comma), "S"));
        p.time_threshold_us = parse_kv(args.substr(comma + 1), "T");
        if (p.spatial_radius < 1 || p.time_threshold_us <= 0) fail();
        return make_baf(p);
    }
    fail();
    return {};
}

std::string FilterSpec::name() const {
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Baf: return "baf";
        case Kind::Mf: return "mf";
    }
    return "none";
}

std::string FilterSpec::params_label() const {
    switch (kind) {
        case Kind::None: return "";
        case Kind::Baf:
            return "S=" + std::to_string(baf.spatial_radius) +
                   ",T=" + std::to_string(baf.time_threshold_us);
        case Kind::Mf: return "T=" + std::to_string(mf.activity_threshold);
    }
    return "";
}

EventStream apply_filter(const EventStream& stream, const FilterSpec& spec) {
    switch (spec.kind) {
        case FilterSpec::Kind::None: return stream;
        case FilterSpec::Kind::Baf: return background_activity_filter(stream, spec.baf);
        case FilterSpec::Kind::Mf: return mask_filter(stream, spec.mf).stream;
    }
    return stream;
}

FrameTensor apply_filter_to_tensor(const FrameTensor& tensor, const FilterSpec& spec) {
    const EventStream events = tensor_to_events(tensor, 0.5f);
    return bin_events(apply_filter(events, spec), tensor.time_bins);
}

TensorDataset apply_filter_to_dataset(const TensorDataset& dataset, const FilterSpec& spec) {
    TensorDataset out;
    out.labels = dataset.labels;
    out.class_count = dataset.class_count;
    out.samples.resize(dataset.samples.size());
    const std::int64_t n = static_cast<std::int64_t>(dataset.samples.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        out.samples[i] = apply_filter_to_tensor(dataset.samples[i], spec);
    }
    return out;
}

}  // namespace dvs
