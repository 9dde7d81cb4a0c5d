#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pioneer/detectors.hpp"

namespace pioneer {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "pioneer-0.1.0";

struct ExperimentSpec {
    std::string name;           // moment-scaling, pair-correlation, existence-decay, annulus-profile, discrete-ptp-decay
    DetectorConfig detector;    // kind, dim, K, iota, resolution (n is taken from the range)
    int n_lo = 8, n_hi = 8;     // scale range
    int log2N_lo = 10, log2N_hi = 16;  // discrete-ptp-decay: N = 2^m
    double delta = 0.05;        // discrete-ptp-decay: gap fraction
    double c = 1.0;             // boundary double points: soup intensity
    std::int64_t cutoff = 4;    // boundary double points: soup diameter cutoff
    std::uint64_t trials = 1;
    std::uint64_t first_trial = 0;  // trials [first_trial, first_trial + trials) of the seed's sequence
    std::uint64_t seed = 0;
    std::uint64_t verify_paths = 0; // trials also scanned without pruning (must agree exactly)

    void validate() const;
    // Everything that determines per-trial results; excludes the trial range.
    std::string canonical() const;
    std::uint64_t hash() const;
};

// Additive statistics at one scale (n, m bin, or log2 N).
struct StatRow {
    int scale = 0;
    std::map<std::string, double> sums;
    bool operator==(const StatRow&) const = default;
};

struct ExperimentRecord {
    std::string experiment;
    std::string config;  // canonical spec
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t first_trial = 0;
    std::uint64_t trials = 0;
    std::string version = kCodeVersion;
    double wall_seconds = 0.0;
    std::vector<StatRow> rows;

    std::string stats_json() const;  // deterministic statistics block
    std::string to_json() const;     // one line
    static ExperimentRecord from_json(const std::string& line);
    const StatRow& row(int scale) const;
    double sum(int scale, const std::string& field) const;
};

ExperimentRecord run_experiment(const ExperimentSpec& spec);
ExperimentRecord run_moment_scaling(const ExperimentSpec& spec);
ExperimentRecord run_pair_correlation(const ExperimentSpec& spec);
ExperimentRecord run_existence_decay(const ExperimentSpec& spec);
ExperimentRecord run_annulus_profile(const ExperimentSpec& spec);
ExperimentRecord run_discrete_ptp_decay(const ExperimentSpec& spec);

// Sums two records of the same spec over disjoint trial ranges.
ExperimentRecord merge_records(const ExperimentRecord& a, const ExperimentRecord& b);

// Append-only JSONL store keyed by config hash.
class ResultStore {
  public:
    explicit ResultStore(std::string path) : path_(std::move(path)) {}
    std::vector<ExperimentRecord> load() const;
    // Atomic rewrite with the record appended; hash_collision error when the
    // hash is already taken by a different spec.
    void append(const ExperimentRecord& rec) const;
    // Merge of all stored records with this hash, if any.
    std::optional<ExperimentRecord> find(std::uint64_t config_hash) const;
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

// Plot-ready summary derived from a record.
struct SummaryRow {
    int scale = 0;
    std::uint64_t trials = 0;
    double estimate = 0.0;
    double stderr_est = 0.0;
    std::map<std::string, double> extra;
};
std::vector<SummaryRow> summarize(const ExperimentRecord& rec);
std::string summary_csv(const ExperimentRecord& rec);

// Ordinary least-squares slope with its standard error.
struct LineFit {
    double slope = 0, intercept = 0, stderr_slope = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Number of unordered bulk box pairs at scale n per distance bin m, where the
// centre distance lies in (2^{-m-1}, 2^{-m}] (planar).
std::map<int, double> bulk_pair_counts(const DetectorConfig& cfg, int n);
// m with box-centre distance in (2^{-m-1}, 2^{-m}], given the squared
// distance d2 in units of the n-box side.
int distance_bin(std::int64_t d2, int n);

}  // namespace pioneer
