#pragma once

// Link kernels chi per pattern class: unconstrained tone-lattice sums of
// mu * conj(mu') with one balance constraint per coincidence block. Every
// class of the perturbation variance and of the receiver-projection
// correction maps onto one kernel evaluation here.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nli/link.hpp"
#include "nli/mu_table.hpp"

namespace nli {

enum class TripleKind { Sci, A, B };

// A channel triple contributing to channel i: Sci = (i,i,i);
// A_k = conj field and first unconj field on k, second on i;
// B_k = conj field and second unconj field on k, first on i.
struct Triple {
    TripleKind kind = TripleKind::Sci;
    int k = 0; // interferer channel (== probe for Sci)

    int ch_conj(int i) const { return kind == TripleKind::Sci ? i : k; }          // ka
    int ch_first(int i) const { return kind == TripleKind::B ? i : (kind == TripleKind::Sci ? i : k); } // kb
    int ch_second(int i) const { return kind == TripleKind::A ? i : (kind == TripleKind::Sci ? i : k); } // kc
    char tag() const { return kind == TripleKind::Sci ? 's' : (kind == TripleKind::A ? 'a' : 'b'); }
};

// Polarity variable carried by a factor (contraction structure of the
// Manakov triple products).
enum class PolVar { Q, Qp, P };

struct VarFactor {
    int channel = 0;
    bool conj = false;
    PolVar pol = PolVar::Q;
    bool t_side = true;
};

// The six factors of the variance product W x conj(W'):
//   0: kb-field of T      (unconj, pol Q)
//   1: kc-field of T      (unconj, pol P)
//   2: ka-field of T      (conj,   pol Q)
//   3: kb-field of T'     (conj,   pol Qp)
//   4: kc-field of T'     (conj,   pol P)
//   5: ka-field of T'     (unconj, pol Qp)
std::array<VarFactor, 6> variance_factors(const Triple& t, const Triple& tp, int probe);

// The four factors of the projection correction E[b^H W]:
//   0: probe symbol conj (pinned, pol P), 1..3 = kb, kc, ka fields of T.
std::array<VarFactor, 4> projection_factors(const Triple& t, int probe);

using Partition = std::vector<std::vector<int>>;

std::string partition_id(const Partition& p);

// Unconstrained-sum kernel for one variance class: sum over tone assignments
// with per-block balance deltas of mu_T * conj(mu_T'), weighted by
// n_tones^(#blocks - 6). mu views are indexed (first unconj, second unconj,
// landing tone).
cdouble eval_variance_kernel(const std::array<VarFactor, 6>& factors, const Partition& blocks,
                             const MuView& mu_t, const MuView& mu_tp, const ToneLattice& lat);

// Kernel for one projection class: blocks containing factor 0 (the pinned
// probe symbol) carry no balance constraint; weight n_tones^(#free blocks - 3).
cdouble eval_projection_kernel(const std::array<VarFactor, 4>& factors, const Partition& blocks,
                               const MuView& mu_t, const ToneLattice& lat);

// ---------------------------------------------------------------------------
// Spec-facing kernel sets

struct KernelSet {
    int probe = 0;
    int interferer = 0; // == probe for SCI
    std::map<std::string, cdouble> values; // class id -> kernel value
    int n_tones = 0;
    double error_estimate = 0.0; // refinement delta, relative
};

KernelSet sci_kernels(int i, const LinkSpec& link, int n_tones = 64, bool with_error = true);
KernelSet xpm_kernels(int i, int k, const LinkSpec& link, int n_tones = 64, bool with_error = true);

} // namespace nli
