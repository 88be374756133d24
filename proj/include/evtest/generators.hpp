#pragma once

// Data generators for simulations: the alternating Normal/Laplace model,
// mean-variance parameterized Beta data, the extremal members of each null
// class (mean 0, variance 1) and piecewise regime shifts.

#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evtest/error.hpp"
#include "evtest/random.hpp"

namespace evtest {

/// Odd positions Normal(nu, eta2), even positions Laplace(nu, eta2) (1-based).
struct NL {
  double nu = 0.0;
  double eta2 = 1.0;
};

/// Beta law with mean nu and variance sigma2.
struct BetaMV {
  double nu = 0.5;
  double sigma2 = 0.05;
};

/// sqrt((1-a)/a) with probability a, -sqrt(a/(1-a)) otherwise.
struct ExtremalPlain {
  double alpha = 0.5;
};

/// +-(2a)^(-1/2) with probability a each, 0 otherwise.
struct ExtremalSymmetric {
  double alpha = 0.25;
};

/// Atom of mass p at -a plus a uniform density on [-a, b], with p and b tied
/// to a so that the mean is 0 and the variance 1.
struct ExtremalUnimodal {
  double a = 0.5;
};

/// Atom at 0 of mass 1 - 2p plus uniform on [-b, b], b = sqrt(3 / (2p)).
struct ExtremalUS {
  double p = 0.5;
};

struct Generator;

/// `pre` for the first break_index draws, `post` afterwards.
struct RegimeShift {
  std::shared_ptr<const Generator> pre;
  std::shared_ptr<const Generator> post;
  std::size_t break_index = 0;
};

struct Generator {
  std::variant<NL, BetaMV, ExtremalPlain, ExtremalSymmetric, ExtremalUnimodal, ExtremalUS, RegimeShift> kind;
};

inline Generator make_regime_shift(Generator pre, Generator post, std::size_t break_index) {
  return Generator{RegimeShift{std::make_shared<const Generator>(std::move(pre)),
                               std::make_shared<const Generator>(std::move(post)), break_index}};
}

/// Standard Beta parameters for mean nu and variance sigma2.
inline std::pair<double, double> beta_params(double nu, double sigma2) {
  if (!(nu > 0.0 && nu < 1.0)) throw Error("Beta mean must lie in (0, 1)");
  if (!(sigma2 > 0.0 && sigma2 < nu * (1.0 - nu)))
    throw Error("Beta variance must lie in (0, nu (1 - nu))");
  const double alpha = nu * (nu - nu * nu - sigma2) / sigma2;
  const double beta = (nu * nu + sigma2 - nu) * (nu - 1.0) / sigma2;
  return {alpha, beta};
}

/// Atom probability p for the unimodal extremal law with atom at -a. Mean 0
/// fixes b = a (1 + p) / (1 - p); unit second moment
/// p a^2 + (1 - p)(a^2 - a b + b^2) / 3 = 1 then gives a^2 (1 + 3p) = 3 (1 - p).
inline double unimodal_extremal_mass(double a) {
  if (!(a > 0.0 && a < 1.0)) throw Error("unimodal extremal parameter a must lie in (0, 1)");
  const double a2 = a * a;
  return (3.0 - a2) / (3.0 * (1.0 + a2));
}

namespace detail {

struct Validator {
  void operator()(const NL& g) const {
    if (!std::isfinite(g.nu) || !(g.eta2 > 0.0) || !std::isfinite(g.eta2))
      throw Error("NL needs finite nu and eta2 > 0");
  }
  void operator()(const BetaMV& g) const { beta_params(g.nu, g.sigma2); }
  void operator()(const ExtremalPlain& g) const {
    if (!(g.alpha > 0.0 && g.alpha < 1.0)) throw Error("plain extremal alpha must lie in (0, 1)");
  }
  void operator()(const ExtremalSymmetric& g) const {
    if (!(g.alpha > 0.0 && g.alpha <= 0.5)) throw Error("symmetric extremal alpha must lie in (0, 1/2]");
  }
  void operator()(const ExtremalUnimodal& g) const { unimodal_extremal_mass(g.a); }
  void operator()(const ExtremalUS& g) const {
    if (!(g.p > 0.0 && g.p <= 0.5)) throw Error("unimodal-symmetric extremal p must lie in (0, 1/2]");
  }
  void operator()(const RegimeShift& g) const {
    if (!g.pre || !g.post) throw Error("regime shift needs both regimes");
    std::visit(*this, g.pre->kind);
    std::visit(*this, g.post->kind);
  }
};

}  // namespace detail

inline void validate(const Generator& g) { std::visit(detail::Validator{}, g.kind); }

namespace detail {

inline void fill(const Generator& g, std::size_t n, Rng& rng, std::vector<double>& out) {
  struct Visitor {
    std::size_t n;
    Rng& rng;
    std::vector<double>& out;

    void operator()(const NL& g) const {
      for (std::size_t i = 0; i < n; ++i)
        out.push_back(i % 2 == 0 ? rng.normal(g.nu, std::sqrt(g.eta2)) : rng.laplace(g.nu, g.eta2));
    }
    void operator()(const BetaMV& g) const {
      const auto [a, b] = beta_params(g.nu, g.sigma2);
      for (std::size_t i = 0; i < n; ++i) out.push_back(rng.beta(a, b));
    }
    void operator()(const ExtremalPlain& g) const {
      const double hi = std::sqrt((1.0 - g.alpha) / g.alpha);
      const double lo = -std::sqrt(g.alpha / (1.0 - g.alpha));
      for (std::size_t i = 0; i < n; ++i) out.push_back(rng.uniform() < g.alpha ? hi : lo);
    }
    void operator()(const ExtremalSymmetric& g) const {
      const double v = 1.0 / std::sqrt(2.0 * g.alpha);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        out.push_back(u < g.alpha ? v : (u < 2.0 * g.alpha ? -v : 0.0));
      }
    }
    void operator()(const ExtremalUnimodal& g) const {
      const double p = unimodal_extremal_mass(g.a);
      const double b = (1.0 + p) / (1.0 - p) * g.a;
      for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        out.push_back(u < p ? -g.a : -g.a + (b + g.a) * rng.uniform());
      }
    }
    void operator()(const ExtremalUS& g) const {
      const double b = std::sqrt(3.0 / (2.0 * g.p));
      for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        out.push_back(u < 2.0 * g.p ? b * (2.0 * rng.uniform() - 1.0) : 0.0);
      }
    }
    void operator()(const RegimeShift& g) const {
      const std::size_t head = std::min(n, g.break_index);
      fill(*g.pre, head, rng, out);
      fill(*g.post, n - head, rng, out);
    }
  };
  std::visit(Visitor{n, rng, out}, g.kind);
}

}  // namespace detail

/// n draws from the generator, consuming the given stream.
inline std::vector<double> generate(const Generator& g, std::size_t n, Rng& rng) {
  validate(g);
  std::vector<double> out;
  out.reserve(n);
  detail::fill(g, n, rng, out);
  return out;
}

inline std::vector<double> gen_nl(double nu, double eta2, std::size_t n, Rng& rng) {
  return generate(Generator{NL{nu, eta2}}, n, rng);
}

inline std::vector<double> gen_extremal(const Generator& kind, std::size_t n, Rng& rng) {
  if (std::holds_alternative<NL>(kind.kind) || std::holds_alternative<BetaMV>(kind.kind) ||
      std::holds_alternative<RegimeShift>(kind.kind))
    throw Error("gen_extremal needs an extremal generator");
  return generate(kind, n, rng);
}

/// Mean and variance of a single-regime generator's marginal law.
inline std::pair<double, double> analytic_moments(const Generator& g) {
  struct Visitor {
    std::pair<double, double> operator()(const NL& x) const { return {x.nu, x.eta2}; }
    std::pair<double, double> operator()(const BetaMV& x) const { return {x.nu, x.sigma2}; }
    std::pair<double, double> operator()(const ExtremalPlain&) const { return {0.0, 1.0}; }
    std::pair<double, double> operator()(const ExtremalSymmetric&) const { return {0.0, 1.0}; }
    std::pair<double, double> operator()(const ExtremalUnimodal&) const { return {0.0, 1.0}; }
    std::pair<double, double> operator()(const ExtremalUS&) const { return {0.0, 1.0}; }
    std::pair<double, double> operator()(const RegimeShift&) const {
      throw Error("regime shifts have no single marginal law");
    }
  };
  return std::visit(Visitor{}, g.kind);
}

inline std::string generator_name(const Generator& g) {
  struct Visitor {
    std::string operator()(const NL&) const { return "NL"; }
    std::string operator()(const BetaMV&) const { return "Beta"; }
    std::string operator()(const ExtremalPlain&) const { return "ExtremalPlain"; }
    std::string operator()(const ExtremalSymmetric&) const { return "ExtremalSymmetric"; }
    std::string operator()(const ExtremalUnimodal&) const { return "ExtremalUnimodal"; }
    std::string operator()(const ExtremalUS&) const { return "ExtremalUS"; }
    std::string operator()(const RegimeShift&) const { return "RegimeShift"; }
  };
  return std::visit(Visitor{}, g.kind);
}

/// Parameters as `key=value` pairs separated by spaces (comma-free for CSV).
inline std::string generator_params(const Generator& g) {
  std::ostringstream os;
  os.precision(12);
  struct Visitor {
    std::ostringstream& os;
    void operator()(const NL& x) const { os << "nu=" << x.nu << " eta2=" << x.eta2; }
    void operator()(const BetaMV& x) const { os << "nu=" << x.nu << " sigma2=" << x.sigma2; }
    void operator()(const ExtremalPlain& x) const { os << "alpha=" << x.alpha; }
    void operator()(const ExtremalSymmetric& x) const { os << "alpha=" << x.alpha; }
    void operator()(const ExtremalUnimodal& x) const { os << "a=" << x.a; }
    void operator()(const ExtremalUS& x) const { os << "p=" << x.p; }
    void operator()(const RegimeShift& x) const {
      os << "pre=" << generator_name(*x.pre) << " post=" << generator_name(*x.post) << " break=" << x.break_index;
    }
  };
  std::visit(Visitor{os}, g.kind);
  return os.str();
}

}  // namespace evtest
