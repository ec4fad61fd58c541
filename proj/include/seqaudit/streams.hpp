#pragma once
/*
Outcome-vector sources: synthetic uniform streams and replay of
recorded audit data.

Synthetic streams draw each coordinate from a uniform distribution
whose support is solved from the requested (mean, variance) pair:
a = mean - sqrt(3 var), b = mean + sqrt(3 var). The first
floor(fraction * k) coordinates carry the non-null mean, the rest are
mean-zero at the same variance. Draws are a pure function of
(seed, replication, step, coordinate).
*/

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace seqaudit {

struct SyntheticStreamSpec {
    int k = 1;
    double nonnull_fraction = 0.0;  // fraction of streams with nonzero mean
    double nonnull_mean = 0.1;
    double variance = 0.2;
    std::uint64_t seed = 0;

    int nonnull_count() const;
};

// Uniform support matching the requested moments. Throws ConfigError
// naming the violated bound when the support escapes [-1, 1].
std::pair<double, double> uniform_params(double mean, double variance);

// The outcome vector of step t (t >= 1) of the given replication.
std::vector<double> synthetic_next(const SyntheticStreamSpec& spec,
                                   std::uint64_t replication, std::uint64_t t);

class StreamSource {
  public:
    virtual ~StreamSource() = default;
    virtual int k() const = 0;
    // Fills `out` with the next outcome vector; false at end of stream.
    virtual bool next(std::vector<double>& out) = 0;
};

class SyntheticSource final : public StreamSource {
  public:
    SyntheticSource(const SyntheticStreamSpec& spec, std::uint64_t replication);
    int k() const override { return spec_.k; }
    bool next(std::vector<double>& out) override;

  private:
    SyntheticStreamSpec spec_;
    std::uint64_t replication_;
    std::uint64_t t_ = 0;
    double null_lo_, null_width_;
    double alt_lo_, alt_width_;
    int alt_count_;
};

struct ReplaySpec {
    std::string path;  // "-" reads stdin
    char delimiter = ',';
    bool has_header = false;
};

// Streams rows of delimited text, one time step per row. Every cell
// must parse as a finite decimal in [-1, 1]; violations raise
// ParseError with the offending row (and column), since silently
// clamping would corrupt an audit.
class ReplayReader {
  public:
    ReplayReader(std::istream& in, const ReplaySpec& spec);

    std::optional<std::vector<double>> next();

    // Column count; reads ahead one row when no header defined it.
    int k();
    const std::vector<std::string>& names() const { return names_; }

  private:
    std::optional<std::vector<double>> parse_row();

    std::istream& in_;
    ReplaySpec spec_;
    long row_ = 0;
    int k_ = -1;
    std::vector<std::string> names_;
    std::optional<std::vector<double>> pending_;
};

class ReplaySource final : public StreamSource {
  public:
    explicit ReplaySource(const ReplaySpec& spec);
    int k() const override;
    bool next(std::vector<double>& out) override;

  private:
    std::unique_ptr<std::istream> owned_;
    std::unique_ptr<ReplayReader> reader_;
};

} // namespace seqaudit
