#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "qlab/noether.hpp"
#include "qlab/packet.hpp"
#include "qlab/rng.hpp"
#include "qlab/stats.hpp"

namespace qlab {

/// Momentum-space detector partition. 1D arrays split the axis into contiguous
/// half-open intervals [e_n, e_{n+1}); 3D arrays tile the sphere of directions
/// with azimuthal wedges or equal-solid-angle polar bands. Every grid node is
/// assigned to exactly one bin (lower edges inclusive), so ties at a boundary
/// are deterministic.
class DetectorArray {
 public:
  enum class Kind { Intervals, Wedges, Bands };

  /// 1D intervals from explicit interior edges; the outer bins extend to the
  /// grid ends so the partition always covers the axis. No edges means a
  /// single bin over everything.
  static DetectorArray intervals(std::vector<double> interior_edges) {
    for (std::size_t i = 1; i < interior_edges.size(); ++i)
      if (!(interior_edges[i] > interior_edges[i - 1]))
        throw Error(ErrorCode::ConfigInvalid, "interval edges must increase");
    DetectorArray a;
    a.kind_ = Kind::Intervals;
    a.edges_ = std::move(interior_edges);
    a.n_ = static_cast<int>(a.edges_.size()) + 1;
    return a;
  }

  /// 1D intervals with hard outer bounds: wave vectors outside [first, last)
  /// belong to no bin, which surfaces as PartitionGap when a packet has
  /// support there.
  static DetectorArray bounded_intervals(std::vector<double> edges) {
    if (edges.size() < 2)
      throw Error(ErrorCode::ConfigInvalid, "bounded intervals need >= 2 edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i] > edges[i - 1]))
        throw Error(ErrorCode::ConfigInvalid, "interval edges must increase");
    DetectorArray a;
    a.kind_ = Kind::Intervals;
    a.edges_ = std::move(edges);
    a.n_ = static_cast<int>(a.edges_.size()) - 1;
    a.bounded_ = true;
    return a;
  }

  static DetectorArray equal_intervals(double lo, double hi, int n) {
    if (n < 1 || !(hi > lo))
      throw Error(ErrorCode::ConfigInvalid, "need n >= 1 increasing intervals");
    std::vector<double> edges;
    for (int i = 1; i < n; ++i) edges.push_back(lo + (hi - lo) * i / n);
    return intervals(std::move(edges));
  }

  /// n azimuthal wedges around the z axis, rotated by `offset` radians so the
  /// edges avoid the lattice planes.
  static DetectorArray wedges(int n, double offset = 0.3) {
    if (n < 1) throw Error(ErrorCode::ConfigInvalid, "need at least 1 wedge");
    DetectorArray a;
    a.kind_ = Kind::Wedges;
    a.n_ = n;
    a.offset_ = offset;
    return a;
  }

  /// n polar bands of equal solid angle (uniform steps in cos theta).
  static DetectorArray bands(int n) {
    if (n < 1) throw Error(ErrorCode::ConfigInvalid, "need at least 1 band");
    DetectorArray a;
    a.kind_ = Kind::Bands;
    a.n_ = n;
    return a;
  }

  int n_bins() const { return n_; }
  Kind kind() const { return kind_; }

  /// Bin index of a wave vector; -1 if no bin covers it (possible only for
  /// interval arrays asked about a different axis range... never for wedges
  /// or bands, which tile all directions).
  int bin_of(const std::array<double, 3>& k, int dim) const {
    switch (kind_) {
      case Kind::Intervals: {
        if (bounded_) {
          if (k[0] < edges_.front() || k[0] >= edges_.back()) return -1;
          int idx = 0;
          while (idx + 2 < static_cast<int>(edges_.size()) && k[0] >= edges_[idx + 1]) ++idx;
          return idx;
        }
        int idx = 0;
        while (idx < static_cast<int>(edges_.size()) && k[0] >= edges_[idx]) ++idx;
        return idx;
      }
      case Kind::Wedges: {
        if (dim != 3) throw Error(ErrorCode::DimensionMismatch, "wedges need 3D");
        double az = std::atan2(k[1], k[0]) - offset_;
        double two_pi = 2.0 * std::numbers::pi;
        az -= two_pi * std::floor(az / two_pi);
        int idx = static_cast<int>(az / two_pi * n_);
        return idx >= n_ ? n_ - 1 : idx;
      }
      case Kind::Bands: {
        if (dim != 3) throw Error(ErrorCode::DimensionMismatch, "bands need 3D");
        double r = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        if (r == 0.0) return 0;
        double c = k[2] / r;
        int idx = static_cast<int>((1.0 - c) / 2.0 * n_);
        if (idx < 0) idx = 0;
        if (idx >= n_) idx = n_ - 1;
        return idx;
      }
    }
    return -1;
  }

 private:
  Kind kind_ = Kind::Intervals;
  int n_ = 0;
  double offset_ = 0.0;
  bool bounded_ = false;
  std::vector<double> edges_;
};

/// Per-bin statistics of a packet against a detector array.
struct DetectorBin {
  double p = 0.0;                              // integrated |alpha|^2 dk^d
  FourVector momentum{0, 0, 0, 0};             // P^mu(n), exact bin sum
  std::array<double, 3> k_rep{0, 0, 0};        // probability-weighted mean wave vector
  FourVector k4_mean{0, 0, 0, 0};              // exact mean 4-vector = P(n)/(hbar p)
  FourVector k4_ideal{0, 0, 0, 0};             // on-shell single wave vector (omega(k_rep)/c, k_rep)
};

struct BinStats {
  std::vector<DetectorBin> bins;
  FourVector total_momentum{0, 0, 0, 0};
};

inline BinStats bin_statistics(const MomentumPacket& packet, const DetectorArray& array) {
  const KGrid& g = packet.grid();
  const PhysicalConstants& pc = packet.constants();
  const int n = array.n_bins();
  std::vector<std::array<long double, 6>> acc(n, {0, 0, 0, 0, 0, 0});  // p, k0..k2, omega/c
  for (std::size_t f = 0; f < packet.alpha().size(); ++f) {
    double w = std::norm(packet.alpha()[f]);
    if (w == 0.0) continue;
    auto k = g.k_vector(f);
    int b = array.bin_of(k, g.dim());
    if (b < 0 || b >= n)
      throw Error(ErrorCode::PartitionGap, "a supported node is not covered by any bin");
    acc[b][0] += w;
    for (int a = 0; a < 3; ++a) acc[b][1 + a] += w * k[a];
    acc[b][4] += w * dispersion(k, pc) / pc.c;
  }
  const double measure = g.k_measure();
  BinStats out;
  out.bins.resize(n);
  for (int b = 0; b < n; ++b) {
    DetectorBin& bin = out.bins[b];
    bin.p = static_cast<double>(acc[b][0]) * measure;
    bin.momentum[0] = pc.hbar * static_cast<double>(acc[b][4]) * measure;
    for (int a = 0; a < 3; ++a)
      bin.momentum[a + 1] = pc.hbar * static_cast<double>(acc[b][1 + a]) * measure;
    if (bin.p > 0.0) {
      for (int a = 0; a < 3; ++a)
        bin.k_rep[a] = static_cast<double>(acc[b][1 + a]) / static_cast<double>(acc[b][0]);
      for (int i = 0; i < 4; ++i) bin.k4_mean[i] = bin.momentum[i] / (pc.hbar * bin.p);
      bin.k4_ideal[0] = dispersion(bin.k_rep, pc) / pc.c;
      for (int a = 0; a < 3; ++a) bin.k4_ideal[a + 1] = bin.k_rep[a];
    }
    for (int i = 0; i < 4; ++i) out.total_momentum[i] += bin.momentum[i];
  }
  return out;
}

inline std::vector<double> bin_probabilities(const MomentumPacket& packet,
                                             const DetectorArray& array) {
  BinStats s = bin_statistics(packet, array);
  std::vector<double> p(s.bins.size());
  for (std::size_t b = 0; b < s.bins.size(); ++b) p[b] = s.bins[b].p;
  return p;
}

inline FourVector bin_momentum(const MomentumPacket& packet, const DetectorArray& array,
                               int n) {
  BinStats s = bin_statistics(packet, array);
  if (n < 0 || n >= static_cast<int>(s.bins.size()))
    throw Error(ErrorCode::ConfigInvalid, "bin index out of range");
  return s.bins[n].momentum;
}

/// Categorical draw as a pure function of (seed, trial_index).
inline int sample_detection(const std::vector<double>& probs, std::uint64_t trial_index,
                            std::uint64_t seed) {
  double u = rng::uniform01(seed, trial_index);
  double cdf = 0.0;
  int last = 0;
  for (std::size_t b = 0; b < probs.size(); ++b) {
    if (probs[b] < 0.0)
      throw Error(ErrorCode::ConfigInvalid, "negative probability");
    cdf += probs[b];
    last = static_cast<int>(b);
    if (u < cdf) return last;
  }
  return last;  // u landed in roundoff slack at the top
}

/// Instantaneous collapse: zero the amplitudes outside bin n and renormalize.
/// The collapsed packet's Noether momentum is P^mu(n) / p(n).
inline MomentumPacket collapse(const MomentumPacket& packet, const DetectorArray& array,
                               int n) {
  const KGrid& g = packet.grid();
  BinStats s = bin_statistics(packet, array);
  if (n < 0 || n >= static_cast<int>(s.bins.size()))
    throw Error(ErrorCode::ConfigInvalid, "bin index out of range");
  if (!(s.bins[n].p > 0.0))
    throw Error(ErrorCode::ZeroBin, "cannot collapse onto a zero-probability bin");
  return packet.restricted([&](std::size_t f) {
    return array.bin_of(g.k_vector(f), g.dim()) == n;
  });
}

/// Per-trial outcomes of a detection run. Counts are sufficient statistics:
/// every registered quantity is a function of the bin alone, so sums rebuild
/// deterministically in bin order no matter how trials were executed.
struct TrialLedger {
  std::uint64_t seed = 0;
  long trials = 0;
  std::vector<long> counts;
  BinStats stats;

  /// Registered 4-momentum of a detection in bin n: the collapsed packet's
  /// exact momentum hbar k4_mean(n).
  FourVector registered(int n) const {
    FourVector r = stats.bins[n].k4_mean;
    return r;
  }
};

struct DetectionForceSummary {
  FourVector mc_mean{0, 0, 0, 0};       // Monte Carlo mean of Delta P
  FourVector mc_stderr{0, 0, 0, 0};
  FourVector exact_mean{0, 0, 0, 0};    // sum p(n) Delta P(n)
  long trials = 0;
};

/// Detection-force balance per bin: Delta P^mu(n) = P^mu - hbar k_ideal^mu(n),
/// the recoil that the source must absorb if the detector registers the
/// idealized single wave vector of Eq-style narrow bins.
inline FourVector detection_balance(const BinStats& s, int n, double hbar) {
  FourVector d;
  for (int i = 0; i < 4; ++i)
    d[i] = s.total_momentum[i] - hbar * s.bins[n].k4_ideal[i];
  return d;
}

/// Run T independent detections and tabulate the detection-force statistics.
inline TrialLedger detection_force_trials(const MomentumPacket& packet,
                                          const DetectorArray& array, long trials,
                                          std::uint64_t seed,
                                          DetectionForceSummary* summary = nullptr) {
  if (trials < 1) throw Error(ErrorCode::ConfigInvalid, "need at least one trial");
  TrialLedger ledger;
  ledger.seed = seed;
  ledger.trials = trials;
  ledger.stats = bin_statistics(packet, array);
  const int n = array.n_bins();
  ledger.counts.assign(n, 0);
  std::vector<double> probs(n);
  for (int b = 0; b < n; ++b) probs[b] = ledger.stats.bins[b].p;
  for (long t = 0; t < trials; ++t)
    ledger.counts[sample_detection(probs, static_cast<std::uint64_t>(t), seed)]++;

  if (summary) {
    const double hbar = packet.constants().hbar;
    summary->trials = trials;
    // deterministic bin-order sums from counts
    for (int i = 0; i < 4; ++i) {
      long double mean = 0.0L, m2 = 0.0L, exact = 0.0L;
      for (int b = 0; b < n; ++b) {
        FourVector d = detection_balance(ledger.stats, b, hbar);
        mean += static_cast<long double>(ledger.counts[b]) * d[i];
        exact += static_cast<long double>(ledger.stats.bins[b].p) * d[i];
      }
      mean /= trials;
      for (int b = 0; b < n; ++b) {
        FourVector d = detection_balance(ledger.stats, b, hbar);
        long double dev = d[i] - mean;
        m2 += static_cast<long double>(ledger.counts[b]) * dev * dev;
      }
      double var = trials > 1 ? static_cast<double>(m2) / (trials - 1) : 0.0;
      summary->mc_mean[i] = static_cast<double>(mean);
      summary->mc_stderr[i] = std::sqrt(var / trials);
      summary->exact_mean[i] = static_cast<double>(exact);
    }
  }
  return ledger;
}

struct ExpectationComparison {
  FourVector mc_mean{0, 0, 0, 0};        // Monte Carlo mean of registered hbar k^mu
  FourVector mc_stderr{0, 0, 0, 0};
  FourVector noether{0, 0, 0, 0};        // packet Noether momentum
  FourVector ideal_expectation{0, 0, 0, 0};  // sum p(n) hbar k_ideal^mu(n)
  long trials = 0;
};

/// Compare the Monte Carlo mean of registered momenta against the packet's
/// Noether momentum. The registered momentum per detection is the collapsed
/// packet's exact momentum; the idealized on-shell expectation is also
/// reported, since its gap to P^mu closes at second order under bin
/// refinement.
inline ExpectationComparison expectation_vs_noether(const MomentumPacket& packet,
                                                    const DetectorArray& array, long trials,
                                                    std::uint64_t seed) {
  TrialLedger ledger = detection_force_trials(packet, array, trials, seed, nullptr);
  const double hbar = packet.constants().hbar;
  const int n = array.n_bins();
  ExpectationComparison out;
  out.trials = trials;
  out.noether = noether_momentum(packet);
  for (int i = 0; i < 4; ++i) {
    long double mean = 0.0L, m2 = 0.0L, ideal = 0.0L;
    for (int b = 0; b < n; ++b) {
      double v = hbar * ledger.stats.bins[b].k4_mean[i];
      mean += static_cast<long double>(ledger.counts[b]) * v;
      ideal += static_cast<long double>(ledger.stats.bins[b].p) * hbar *
               ledger.stats.bins[b].k4_ideal[i];
    }
    mean /= trials;
    for (int b = 0; b < n; ++b) {
      double v = hbar * ledger.stats.bins[b].k4_mean[i];
      long double dev = v - mean;
      m2 += static_cast<long double>(ledger.counts[b]) * dev * dev;
    }
    double var = trials > 1 ? static_cast<double>(m2) / (trials - 1) : 0.0;
    out.mc_mean[i] = static_cast<double>(mean);
    out.mc_stderr[i] = std::sqrt(var / trials);
    out.ideal_expectation[i] = static_cast<double>(ideal);
  }
  return out;
}

/// Pearson statistic of observed counts against expected probabilities.
/// Bins with negligible expectation are folded into their neighbor.
inline double chi_squared_statistic(const std::vector<long>& counts,
                                    const std::vector<double>& probs, long trials,
                                    int* dof = nullptr) {
  double stat = 0.0;
  int used = 0;
  double carry_obs = 0.0, carry_exp = 0.0;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    carry_obs += counts[b];
    carry_exp += probs[b] * trials;
    if (carry_exp >= 5.0) {  // standard minimum expected count
      double d = carry_obs - carry_exp;
      stat += d * d / carry_exp;
      carry_obs = carry_exp = 0.0;
      ++used;
    }
  }
  if (carry_exp > 0.0) {
    double d = carry_obs - carry_exp;
    stat += d * d / carry_exp;
    ++used;
  }
  if (dof) *dof = used - 1;
  return stat;
}

}  // namespace qlab
