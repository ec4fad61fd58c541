#include "seqaudit/streams.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "seqaudit/errors.hpp"
#include "seqaudit/rng.hpp"

namespace seqaudit {

int SyntheticStreamSpec::nonnull_count() const {
    // Nudge past representation error so 0.30 * 250 floors to 75, not 74.
    return static_cast<int>(std::floor(nonnull_fraction * k + 1e-9));
}

std::pair<double, double> uniform_params(double mean, double variance) {
    if (!(variance > 0.0)) throw ConfigError("uniform_params: variance must be positive");
    const double half_width = std::sqrt(3.0 * variance);
    const double a = mean - half_width;
    const double b = mean + half_width;
    if (a < -1.0)
        throw ConfigError("uniform_params: infeasible moments, lower support " +
                          std::to_string(a) + " < -1");
    if (b > 1.0)
        throw ConfigError("uniform_params: infeasible moments, upper support " +
                          std::to_string(b) + " > 1");
    return {a, b};
}

std::vector<double> synthetic_next(const SyntheticStreamSpec& spec,
                                   std::uint64_t replication, std::uint64_t t) {
    const auto [null_a, null_b] = uniform_params(0.0, spec.variance);
    const int alt_count = spec.nonnull_count();
    double alt_a = 0.0, alt_b = 0.0;
    if (alt_count > 0) std::tie(alt_a, alt_b) = uniform_params(spec.nonnull_mean, spec.variance);

    std::vector<double> out(static_cast<std::size_t>(spec.k));
    for (int i = 0; i < spec.k; ++i) {
        const double u = keyed_uniform(spec.seed, replication, t, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] =
            i < alt_count ? alt_a + u * (alt_b - alt_a) : null_a + u * (null_b - null_a);
    }
    return out;
}

SyntheticSource::SyntheticSource(const SyntheticStreamSpec& spec, std::uint64_t replication)
    : spec_(spec), replication_(replication) {
    if (spec.k < 1) throw ConfigError("synthetic stream: k must be positive");
    if (spec.nonnull_fraction < 0.0 || spec.nonnull_fraction > 1.0)
        throw ConfigError("synthetic stream: fraction must lie in [0,1]");
    const auto [a0, b0] = uniform_params(0.0, spec.variance);
    null_lo_ = a0;
    null_width_ = b0 - a0;
    alt_count_ = spec.nonnull_count();
    alt_lo_ = null_lo_;
    alt_width_ = null_width_;
    if (alt_count_ > 0) {
        const auto [a1, b1] = uniform_params(spec.nonnull_mean, spec.variance);
        alt_lo_ = a1;
        alt_width_ = b1 - a1;
    }
}

bool SyntheticSource::next(std::vector<double>& out) {
    t_ += 1;
    out.resize(static_cast<std::size_t>(spec_.k));
    for (int i = 0; i < spec_.k; ++i) {
        const double u =
            keyed_uniform(spec_.seed, replication_, t_, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] =
            i < alt_count_ ? alt_lo_ + u * alt_width_ : null_lo_ + u * null_width_;
    }
    return true;
}

namespace {

std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_cells(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            cells.push_back(strip(line.substr(start)));
            break;
        }
        cells.push_back(strip(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

} // namespace

ReplayReader::ReplayReader(std::istream& in, const ReplaySpec& spec) : in_(in), spec_(spec) {
    if (spec_.has_header) {
        std::string line;
        if (std::getline(in_, line)) {
            ++row_;
            names_ = split_cells(line, spec_.delimiter);
            if (names_.empty()) throw ParseError(row_, 0, "empty header");
            k_ = static_cast<int>(names_.size());
        }
        // A missing header row just means an empty stream.
    }
}

std::optional<std::vector<double>> ReplayReader::parse_row() {
    std::string line;
    while (std::getline(in_, line)) {
        ++row_;
        if (strip(line).empty()) continue;
        const std::vector<std::string> cells = split_cells(line, spec_.delimiter);
        if (k_ >= 0 && static_cast<int>(cells.size()) != k_)
            throw ParseError(row_, 0,
                             "expected " + std::to_string(k_) + " values, got " +
                                 std::to_string(cells.size()));
        std::vector<double> values(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string& cell = cells[i];
            const int column = static_cast<int>(i) + 1;
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw ParseError(row_, column, "non-numeric cell '" + cell + "'");
            if (!std::isfinite(v))
                throw ParseError(row_, column, "non-finite value");
            if (v < -1.0 || v > 1.0)
                throw ParseError(row_, column,
                                 "value " + cell + " outside [-1,1]");
            values[i] = v;
        }
        if (k_ < 0) k_ = static_cast<int>(values.size());
        return values;
    }
    return std::nullopt;
}

std::optional<std::vector<double>> ReplayReader::next() {
    if (pending_) {
        auto row = std::move(*pending_);
        pending_.reset();
        return row;
    }
    return parse_row();
}

int ReplayReader::k() {
    if (k_ < 0 && !pending_) pending_ = parse_row();
    return k_;
}

ReplaySource::ReplaySource(const ReplaySpec& spec) {
    if (spec.path == "-") {
        reader_ = std::make_unique<ReplayReader>(std::cin, spec);
    } else {
        auto file = std::make_unique<std::ifstream>(spec.path);
        if (!file->is_open())
            throw ConfigError("replay: cannot open input '" + spec.path + "'");
        reader_ = std::make_unique<ReplayReader>(*file, spec);
        owned_ = std::move(file);
    }
}

int ReplaySource::k() const { return reader_->k(); }

bool ReplaySource::next(std::vector<double>& out) {
    auto row = reader_->next();
    if (!row) return false;
    out = std::move(*row);
    return true;
}

} // namespace seqaudit
