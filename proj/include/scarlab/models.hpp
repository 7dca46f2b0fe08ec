#pragma once

// Model Hamiltonians (xorX, PXP and perturbed PXP, far-coupling SSH), the exact
// scar tower of the xorX chain, and reference product states.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scarlab/hilbert.hpp"

namespace scarlab {

struct HamiltonianOp {
  SparseOp op;
  BasisPtr basis;
  nlohmann::json metadata;

  Eigen::Index dimension() const { return op.dimension(); }
};

struct XorXParams {
  double lambda = 1.0;
  double delta = 0.1;
  double j = 1.0;
  int n = 12;
};

enum class PXPBoundary { Open, Periodic };

struct PXPPerturbation {
  enum class Kind { None, PXPZ, Staggered, Uniform };
  Kind kind = Kind::None;
  double strength = 0.0;
};

struct PXPParams {
  double omega = 2.0;
  int n = 12;
  PXPBoundary boundary = PXPBoundary::Open;
  // Adds sigma^x_1 P^0_2 and P^0_{n-1} sigma^x_n at the open ends.
  bool end_terms = false;
  PXPPerturbation perturbation;
};

// Defaults are placeholders rather than published device values.
struct SSHParams {
  double j_even = 1.0;
  double j_odd = 1.0;
  double j_nnn = 0.1;
  int n = 12;
};

enum class ReferenceLabel { AllZero, Z2, Z1001, Ferro };

std::string to_string(ReferenceLabel label);
ReferenceLabel parse_reference_label(const std::string& text);

// Pauli-string expansions (0-based sites). Exposed for operator algebra tests.
std::vector<PauliString> xorx_terms(const XorXParams& params);
std::vector<PauliString> pxp_terms(const PXPParams& params);
std::vector<PauliString> ssh_terms(const SSHParams& params);
std::vector<PauliString> raising_q_dagger_terms(int n);
std::vector<PauliString> domain_wall_operator_terms(int n);  // sum_i sigma^z_i sigma^z_{i+1}
std::vector<PauliString> total_sz_terms(int n, int first = 0, int last = -1);

HamiltonianOp build_xorx(const XorXParams& params, const SectorConstraint& sector);
HamiltonianOp build_pxp(const PXPParams& params, const SectorConstraint& sector);
HamiltonianOp build_ssh(const SSHParams& params, const SectorConstraint& sector);

struct ScarState {
  int m = 0;
  StateVector state;
  // N_m such that |S_m> = (Q^dagger)^m |0> / (m! sqrt(N_m)).
  double normalization = 1.0;
};

// |S_m> on `basis` (which must contain the support; frozen (0,0) boundaries expected).
ScarState exact_scar(int m, const BasisPtr& basis);
ScarState exact_scar(int m, int n);

// Every |S_m>, m = 0, 1, ... until (Q^dagger)^m |0> vanishes.
std::vector<ScarState> scar_tower(const BasisPtr& basis);

struct ReferenceOptions {
  // Z2 tie-break: false selects |1010...> (bit 0 = 1), true selects |0101...>.
  bool z2_alternate = false;
};

Bits reference_config(ReferenceLabel label, int n, const ReferenceOptions& options = {});
StateVector reference_state(ReferenceLabel label, const BasisPtr& basis, const ReferenceOptions& options = {});

}  // namespace scarlab
