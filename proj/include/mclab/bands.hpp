#pragma once

// Band structures on finite ensembles of configurations t in [-1,1]^m.
//
// Positions are 0-based: position k holds t_{k+1}. "Even indices" in the usual
// 1-based sense are the odd positions. A band's least element is its smallest
// position, not its smallest value.

#include "mclab/geometry.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mclab {

using Configuration = std::vector<double>;
using Ensemble = std::vector<Configuration>;

struct BandParams {
    double c_n = 0.0;
    double eps_lemma = 0.0;
    double delta = 0.0;
    double delta_prime = 0.0;
    double rho = 0.0;
    double rho_prime = 0.0;
    double alpha1 = 0.0;
    double beta1 = 0.0;
    double gamma2 = 0.0;  // max(alpha2, beta2), from the caller

    // c_n = 1/(4n), eps = 1/(4n^2), delta = c_n/(2n), delta' = (eps/2) delta,
    // rho = delta'/2, rho' = (eps/2) rho.
    static BandParams defaults(int n, double alpha1, double beta1, double gamma2);

    // delta' < eps delta, rho < delta', rho' < eps rho, all positive.
    void validate() const;
};

// Most frequent class must hold at least (1 - tolerance) times the fraction
// the pigeonhole argument promises.
struct SamplingPolicy {
    double tolerance = 0.2;
};

struct SortResult {
    std::vector<int> sigma;  // sigma[i] = position holding the i-th smallest value
    Ensemble sub;
    double fraction = 0.0;
};

SortResult sort_class(const Ensemble& ensemble, const SamplingPolicy& policy = {});

struct GapResult {
    std::vector<int> breaks;  // ranks j (1..m-1, in sigma order) opening a new band
    Ensemble sub;
    std::vector<std::vector<int>> bands;  // ascending positions, ordered by least element
    double fraction = 0.0;
};

// Bands over the positions listed in sigma, which must be in increasing order
// of value on every configuration. A gap equal to the threshold breaks.
GapResult gap_partition(const Ensemble& sorted, const std::vector<int>& sigma, double threshold,
                        const SamplingPolicy& policy = {});

enum class BandStage { first, second };

struct BandCounts {
    int free = 0;
    int quasi_free = 0;
    int bound = 0;
    int M1 = 0;  // quasi-free outside the last band
    int M2 = 0;  // quasi-free inside the last band
    int N = 0;   // free and quasi-free inside the last band
    int R2 = 0;  // bound inside the last band
    int k = 0;   // surviving positions
};

struct BandPartition {
    int m = 0;
    std::vector<std::vector<int>> bands;  // ascending positions; never contain dropped ones
    std::vector<int> last_band;            // first-stage band holding position m-1
    int dropped_prefix = 0;                // positions below this are thrown away

    std::vector<IndexRole> roles() const;
    std::vector<int> anchors() const;  // band minimum for quasi-free and bound positions, -1 otherwise
    SliceLayout layout() const;
    BandCounts counts() const;
    int free_or_quasi_free() const;
};

struct RefineResult {
    BandPartition partition;
    Ensemble survivors;
    BandParams params;  // after any shrinking
    int iterations = 0;
};

// First stage: sort class, then gap bands at delta alpha1, shrinking
// (delta, delta') -> (delta'/n, eps delta'/(2n)) while a bound pair breaks the
// delta' alpha1 window on a majority. Second stage: the same inside the band
// holding the last position, at rho gamma2 / rho' gamma2, with `first` the
// first-stage partition. More than n passes is an InvariantError.
RefineResult refine_partition(const Ensemble& ensemble, const BandParams& params, BandStage stage,
                              const BandPartition* first = nullptr, const SamplingPolicy& policy = {});

// Per-configuration window check for the stage; returns a description of the
// first failure or nullopt.
std::optional<std::string> window_violation(const BandPartition& p, const BandParams& params, BandStage stage,
                                            const Configuration& t);

struct DropResult {
    BandPartition partition;
    std::vector<int> count_trace;  // free + quasi-free count before each drop and at the end
};

DropResult drop_and_redesignate(const BandPartition& partition, int n);

struct PipelineResult {
    RefineResult first;
    RefineResult second;
    DropResult dropped;
    double survivor_fraction = 0.0;
};

PipelineResult run_band_pipeline(const Ensemble& ensemble, const BandParams& params, int n,
                                 const SamplingPolicy& policy = {});

struct SliceCoordinates {
    std::vector<double> t0;   // dropped prefix
    std::vector<double> tau;  // free and quasi-free values in position order
    std::vector<double> s;    // bound minus anchor, in position order
};

SliceCoordinates slice_coordinates(const BandPartition& partition, const Configuration& t);

struct JacobianCertificate {
    double lower_bound = 0.0;
    double actual = 0.0;
    bool ok = false;
};

// |t_i - t_j| < eps |t_j - t_l| for i bound to j and l another free or
// quasi-free position.
bool lemma_window_holds(const BandPartition& partition, double eps_lemma, const Configuration& t);

// actual = sliced Jacobian, lower = constant * prod |tau_i - tau_j|.
JacobianCertificate certify_jacobian(const BandPartition& partition, const BandParams& params,
                                     const Configuration& t, double constant);

// 0.9 times the smallest actual / prod ratio over the admissible corpus.
double calibrate_jacobian_constant(const std::vector<std::pair<BandPartition, Configuration>>& corpus,
                                   const BandParams& params);

// Synthetic ensembles standing in for the tower sets: a random template in
// which each odd 1-based index is, with probability cluster_prob, placed at a
// log-uniform distance from an earlier entry, then per-sample jitter. Even
// 1-based indices keep c_n alpha1 from all earlier entries, others c_n beta1,
// the last one c_n beta2.
struct EnsembleModel {
    int n = 2;
    double alpha1 = 1.0;
    double beta1 = 1e-4;
    double beta2 = 1e-3;
    double cluster_prob = 0.6;
    int count = 200;
};

Ensemble sample_band_ensemble(const EnsembleModel& model, const BandParams& params, std::mt19937_64& rng);

}  // namespace mclab
