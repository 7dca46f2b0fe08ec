#include "scarlab/models.hpp"

#include <cmath>

namespace scarlab {

namespace {

PauliString term(Complex coeff, std::vector<SiteFactor> factors) { return PauliString{coeff, std::move(factors)}; }

void require_finite(double v, const char* name) {
  require(std::isfinite(v), ErrorCode::InvalidArgument, std::string(name) + " must be finite");
}

nlohmann::json sector_json(const SectorConstraint& s) {
  return {{"constraint", s.describe()},
          {"spin_convention", "sigma_z|0>=-|0>, sigma_plus=|1><0|"},
          {"domain_wall_convention", "unequal adjacent bits over all n-1 bonds (boundary bonds included)"},
          {"site_indexing", "0-based"}};
}

}  // namespace

std::string to_string(ReferenceLabel label) {
  switch (label) {
    case ReferenceLabel::AllZero: return "AllZero";
    case ReferenceLabel::Z2: return "Z2";
    case ReferenceLabel::Z1001: return "Z1001";
    case ReferenceLabel::Ferro: return "Ferro";
  }
  return "?";
}

ReferenceLabel parse_reference_label(const std::string& text) {
  if (text == "AllZero" || text == "allzero") return ReferenceLabel::AllZero;
  if (text == "Z2" || text == "z2") return ReferenceLabel::Z2;
  if (text == "Z1001" || text == "z1001") return ReferenceLabel::Z1001;
  if (text == "Ferro" || text == "ferro") return ReferenceLabel::Ferro;
  throw Error(ErrorCode::Config, "unknown reference state '" + text + "'");
}

// ---------------------------------------------------------------------------
// Term expansions

std::vector<PauliString> xorx_terms(const XorXParams& p) {
  std::vector<PauliString> terms;
  const int n = p.n;
  // lambda (X_s - Z_{s-1} X_s Z_{s+1}) = 2 lambda X_s on configurations with unequal neighbours,
  // written with projectors so that every string keeps the domain-wall number.
  for (int s = 1; s <= n - 2; ++s) {
    terms.push_back(term(2.0 * p.lambda, {{s - 1, SiteOp::P0}, {s, SiteOp::X}, {s + 1, SiteOp::P1}}));
    terms.push_back(term(2.0 * p.lambda, {{s - 1, SiteOp::P1}, {s, SiteOp::X}, {s + 1, SiteOp::P0}}));
  }
  for (int s = 0; s < n; ++s) terms.push_back(term(p.delta, {{s, SiteOp::Z}}));
  for (int s = 0; s + 1 < n; ++s) terms.push_back(term(p.j, {{s, SiteOp::Z}, {s + 1, SiteOp::Z}}));
  return terms;
}

std::vector<PauliString> pxp_terms(const PXPParams& p) {
  std::vector<PauliString> terms;
  const int n = p.n;
  const double half = 0.5 * p.omega;
  const bool pbc = p.boundary == PXPBoundary::Periodic;
  auto wrap = [n](int s) { return ((s % n) + n) % n; };

  // Centres of the P X P terms that are present.
  std::vector<int> centres;
  if (pbc) {
    for (int s = 0; s < n; ++s) centres.push_back(s);
  } else {
    for (int s = 1; s <= n - 2; ++s) centres.push_back(s);
  }
  for (int s : centres)
    terms.push_back(term(half, {{wrap(s - 1), SiteOp::P0}, {s, SiteOp::X}, {wrap(s + 1), SiteOp::P0}}));
  if (!pbc && p.end_terms) {
    terms.push_back(term(half, {{0, SiteOp::X}, {1, SiteOp::P0}}));
    terms.push_back(term(half, {{n - 2, SiteOp::P0}, {n - 1, SiteOp::X}}));
  }

  const double lam = p.perturbation.strength;
  switch (p.perturbation.kind) {
    case PXPPerturbation::Kind::None:
      break;
    case PXPPerturbation::Kind::PXPZ:
      for (int s : centres) {
        const bool has_left = pbc || s - 2 >= 0;
        const bool has_right = pbc || s + 2 <= n - 1;
        if (has_left)
          terms.push_back(term(-lam, {{wrap(s - 2), SiteOp::Z}, {wrap(s - 1), SiteOp::P0}, {s, SiteOp::X},
                                      {wrap(s + 1), SiteOp::P0}}));
        if (has_right)
          terms.push_back(term(-lam, {{wrap(s - 1), SiteOp::P0}, {s, SiteOp::X}, {wrap(s + 1), SiteOp::P0},
                                      {wrap(s + 2), SiteOp::Z}}));
      }
      break;
    case PXPPerturbation::Kind::Staggered:
      // (-1)^i with the 1-based site label i = s + 1.
      for (int s = 0; s < n; ++s) terms.push_back(term((s % 2 == 0) ? -lam : lam, {{s, SiteOp::Z}}));
      break;
    case PXPPerturbation::Kind::Uniform:
      for (int s = 0; s < n; ++s) terms.push_back(term(lam, {{s, SiteOp::Z}}));
      break;
  }
  return terms;
}

std::vector<PauliString> ssh_terms(const SSHParams& p) {
  std::vector<PauliString> terms;
  auto hop = [&terms](double amp, int a, int b) {
    if (amp == 0.0) return;
    terms.push_back(term(amp, {{a, SiteOp::Plus}, {b, SiteOp::Minus}}));
    terms.push_back(term(amp, {{b, SiteOp::Plus}, {a, SiteOp::Minus}}));
  };
  // Alternating nearest-neighbour bonds over the whole open chain: bond (s, s+1) carries
  // J_e when the 1-based left site is odd and J_o when it is even.
  for (int s = 0; s + 1 < p.n; ++s) hop((s % 2 == 0) ? p.j_even : p.j_odd, s, s + 1);
  for (int s = 0; s + 3 < p.n; ++s) hop(p.j_nnn, s, s + 3);
  return terms;
}

std::vector<PauliString> raising_q_dagger_terms(int n) {
  std::vector<PauliString> terms;
  for (int s = 1; s <= n - 2; ++s) {
    // (-1)^i with 1-based i = s + 1.
    const double sign = ((s + 1) % 2 == 0) ? 1.0 : -1.0;
    terms.push_back(term(sign, {{s - 1, SiteOp::P0}, {s, SiteOp::Plus}, {s + 1, SiteOp::P0}}));
  }
  return terms;
}

std::vector<PauliString> domain_wall_operator_terms(int n) {
  std::vector<PauliString> terms;
  for (int s = 0; s + 1 < n; ++s) terms.push_back(term(1.0, {{s, SiteOp::Z}, {s + 1, SiteOp::Z}}));
  return terms;
}

std::vector<PauliString> total_sz_terms(int n, int first, int last) {
  if (last < 0) last = n;
  std::vector<PauliString> terms;
  for (int s = first; s < last; ++s) terms.push_back(term(1.0, {{s, SiteOp::Z}}));
  return terms;
}

// ---------------------------------------------------------------------------
// Builders

HamiltonianOp build_xorx(const XorXParams& params, const SectorConstraint& sector) {
  require(params.n >= 4, ErrorCode::InvalidArgument, "xorX needs n >= 4");
  require_finite(params.lambda, "lambda");
  require_finite(params.delta, "delta");
  require_finite(params.j, "J");
  require(sector.n == params.n, ErrorCode::InvalidArgument, "sector built for a different chain length");
  require(sector.kind == SectorConstraint::Kind::FrozenBoundary || sector.kind == SectorConstraint::Kind::DomainWallNumber ||
              sector.kind == SectorConstraint::Kind::FullSpace,
          ErrorCode::Incompatible, "xorX acts on frozen-boundary or domain-wall sectors");
  auto basis = build_sector(params.n, sector);
  const auto terms = xorx_terms(params);
  HamiltonianOp h{SparseOp::from_terms(*basis, terms, true), basis, {}};
  h.metadata = {{"model", "xorX"},
                {"params", {{"lambda", params.lambda}, {"delta", params.delta}, {"J", params.j}, {"n", params.n}}},
                {"sector", sector_json(sector)}};
  return h;
}

HamiltonianOp build_pxp(const PXPParams& params, const SectorConstraint& sector) {
  require(params.n >= 4, ErrorCode::InvalidArgument, "PXP needs n >= 4");
  require_finite(params.omega, "Omega");
  require_finite(params.perturbation.strength, "perturbation strength");
  require(sector.n == params.n, ErrorCode::InvalidArgument, "sector built for a different chain length");
  require(sector.kind == SectorConstraint::Kind::RydbergBlockade || sector.kind == SectorConstraint::Kind::FullSpace,
          ErrorCode::Incompatible, "PXP acts on the blockade sector (or the full space)");
  if (sector.kind == SectorConstraint::Kind::RydbergBlockade)
    require(sector.periodic == (params.boundary == PXPBoundary::Periodic), ErrorCode::Incompatible,
            "blockade sector boundary differs from the Hamiltonian boundary");
  auto basis = build_sector(params.n, sector);
  const auto terms = pxp_terms(params);
  HamiltonianOp h{SparseOp::from_terms(*basis, terms, true), basis, {}};
  const char* pert = "none";
  switch (params.perturbation.kind) {
    case PXPPerturbation::Kind::None: pert = "none"; break;
    case PXPPerturbation::Kind::PXPZ: pert = "pxpz"; break;
    case PXPPerturbation::Kind::Staggered: pert = "staggered"; break;
    case PXPPerturbation::Kind::Uniform: pert = "uniform"; break;
  }
  h.metadata = {{"model", "PXP"},
                {"params",
                 {{"omega", params.omega},
                  {"n", params.n},
                  {"boundary", params.boundary == PXPBoundary::Periodic ? "periodic" : "open"},
                  {"end_terms", params.end_terms},
                  {"perturbation", pert},
                  {"perturbation_strength", params.perturbation.strength}}},
                {"sector", sector_json(sector)}};
  return h;
}

HamiltonianOp build_ssh(const SSHParams& params, const SectorConstraint& sector) {
  require(params.n >= 4, ErrorCode::InvalidArgument, "SSH needs n >= 4");
  require(sector.n == params.n, ErrorCode::InvalidArgument, "sector built for a different chain length");
  require(sector.kind == SectorConstraint::Kind::MagnetizationNumber || sector.kind == SectorConstraint::Kind::FullSpace,
          ErrorCode::Incompatible, "SSH acts on magnetization sectors (or the full space)");
  auto basis = build_sector(params.n, sector);
  const auto terms = ssh_terms(params);
  HamiltonianOp h{SparseOp::from_terms(*basis, terms, true), basis, {}};
  h.metadata = {{"model", "SSH"},
                {"params",
                 {{"j_even", params.j_even}, {"j_odd", params.j_odd}, {"j_nnn", params.j_nnn}, {"n", params.n}}},
                {"couplings_source", "placeholder defaults, not published values"},
                {"bond_convention", "alternating J_e/J_o over all open-chain bonds"},
                {"sector", sector_json(sector)}};
  return h;
}

// ---------------------------------------------------------------------------
// Scar tower

ScarState exact_scar(int m, const BasisPtr& basis) {
  require(m >= 0, ErrorCode::InvalidArgument, "quasiparticle count must be non-negative");
  const int n = basis->sites();
  require(n >= 3, ErrorCode::InvalidArgument, "scar tower needs n >= 3");
  const auto q_dagger = raising_q_dagger_terms(n);
  auto psi = StateVector::basis_state(basis, 0);
  double factorial = 1.0;
  for (int k = 1; k <= m; ++k) {
    psi = pauli_sum_apply(q_dagger, psi);
    factorial *= k;
    require(psi.norm() > 0.0, ErrorCode::ZeroState, "(Q^dagger)^" + std::to_string(k) + " annihilates the vacuum");
  }
  const double nrm = psi.norm();
  ScarState s;
  s.m = m;
  s.normalization = (nrm / factorial) * (nrm / factorial);
  s.state = psi.normalized();
  return s;
}

ScarState exact_scar(int m, int n) { return exact_scar(m, build_sector(n, SectorConstraint::frozen(n))); }

std::vector<ScarState> scar_tower(const BasisPtr& basis) {
  std::vector<ScarState> tower;
  for (int m = 0;; ++m) {
    try {
      tower.push_back(exact_scar(m, basis));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroState) throw;
      break;
    }
  }
  return tower;
}

// ---------------------------------------------------------------------------
// Reference states

Bits reference_config(ReferenceLabel label, int n, const ReferenceOptions& options) {
  Bits c = 0;
  switch (label) {
    case ReferenceLabel::AllZero:
    case ReferenceLabel::Ferro:
      return 0;
    case ReferenceLabel::Z2:
      for (int s = 0; s < n; ++s)
        if ((s % 2 == 0) != options.z2_alternate) c |= Bits{1} << s;
      return c;
    case ReferenceLabel::Z1001:
      require(n % 4 == 0, ErrorCode::NotInSector, "Z1001 needs n divisible by 4");
      for (int s = 0; s < n; ++s)
        if (s % 4 == 0 || s % 4 == 3) c |= Bits{1} << s;
      return c;
  }
  return c;
}

StateVector reference_state(ReferenceLabel label, const BasisPtr& basis, const ReferenceOptions& options) {
  return StateVector::basis_state(basis, reference_config(label, basis->sites(), options));
}

}  // namespace scarlab
