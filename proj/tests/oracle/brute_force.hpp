#pragma once

// Direct, dense re-evaluations of the update rules and the lower bound.
// Deliberately shares no code with ptbcc_core: nested std::vector storage,
// a -1-filled task x worker label grid instead of adjacency lists, and
// boost::math::digamma in place of the library's own.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using Cube = std::vector<Mat>;
using LabelGrid = std::vector<std::vector<int>>;  // [task][worker], -1 = missing

struct Problem {
  std::size_t T, W, K, S;
  LabelGrid y;
};

struct Params {
  Vec u;     // K
  Mat beta;  // W x S
  Cube a;    // S x K x K
  Vec nu;
  Mat eta;
  Cube mu;
  Mat phi;    // T x K
  Cube theta; // W x T x S, meaningful only where y[i][j] >= 0
};

inline double psi(double x) { return boost::math::digamma(x); }

inline double sum(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline Vec elog_dirichlet(const Vec& alpha) {
  Vec out(alpha.size());
  const double total = psi(sum(alpha));
  for (std::size_t k = 0; k < alpha.size(); ++k) out[k] = psi(alpha[k]) - total;
  return out;
}

inline double log_b(const Vec& alpha) {
  double s = 0.0;
  for (double x : alpha) s += std::lgamma(x);
  return s - std::lgamma(sum(alpha));
}

inline Vec normalize_exp(Vec logits) {
  double m = logits[0];
  for (double x : logits) m = x > m ? x : m;
  double z = 0.0;
  for (auto& x : logits) z += (x = std::exp(x - m));
  for (auto& x : logits) x /= z;
  return logits;
}

inline Vec nu(const Problem& p, const Params& q) {
  Vec out = q.u;
  for (std::size_t k = 0; k < p.K; ++k)
    for (std::size_t i = 0; i < p.T; ++i) out[k] += q.phi[i][k];
  return out;
}

inline Mat eta(const Problem& p, const Params& q) {
  Mat out = q.beta;
  for (std::size_t j = 0; j < p.W; ++j)
    for (std::size_t s = 0; s < p.S; ++s)
      for (std::size_t i = 0; i < p.T; ++i)
        if (p.y[i][j] >= 0) out[j][s] += q.theta[j][i][s];
  return out;
}

inline Cube mu(const Problem& p, const Params& q) {
  Cube out = q.a;
  for (std::size_t s = 0; s < p.S; ++s)
    for (std::size_t k = 0; k < p.K; ++k)
      for (std::size_t l = 0; l < p.K; ++l)
        for (std::size_t j = 0; j < p.W; ++j)
          for (std::size_t i = 0; i < p.T; ++i)
            if (p.y[i][j] == static_cast<int>(l)) out[s][k][l] += q.phi[i][k] * q.theta[j][i][s];
  return out;
}

struct ELog {
  Vec tau;
  Mat pi;
  Cube v;
};

inline ELog elog(const Params& q) {
  ELog e;
  e.tau = elog_dirichlet(q.nu);
  for (const auto& row : q.eta) e.pi.push_back(elog_dirichlet(row));
  for (const auto& proto : q.mu) {
    Mat m;
    for (const auto& row : proto) m.push_back(elog_dirichlet(row));
    e.v.push_back(m);
  }
  return e;
}

inline Cube theta(const Problem& p, const Params& q) {
  const ELog e = elog(q);
  Cube out(p.W, Mat(p.T, Vec(p.S, 0.0)));
  for (std::size_t j = 0; j < p.W; ++j)
    for (std::size_t i = 0; i < p.T; ++i) {
      if (p.y[i][j] < 0) continue;
      Vec logits(p.S);
      for (std::size_t s = 0; s < p.S; ++s) {
        logits[s] = e.pi[j][s];
        for (std::size_t k = 0; k < p.K; ++k) logits[s] += q.phi[i][k] * e.v[s][k][p.y[i][j]];
      }
      out[j][i] = normalize_exp(logits);
    }
  return out;
}

inline Mat phi(const Problem& p, const Params& q) {
  const ELog e = elog(q);
  Mat out(p.T);
  for (std::size_t i = 0; i < p.T; ++i) {
    Vec logits(p.K);
    for (std::size_t k = 0; k < p.K; ++k) {
      logits[k] = e.tau[k];
      for (std::size_t j = 0; j < p.W; ++j) {
        if (p.y[i][j] < 0) continue;
        for (std::size_t s = 0; s < p.S; ++s) logits[k] += q.theta[j][i][s] * e.v[s][k][p.y[i][j]];
      }
    }
    out[i] = normalize_exp(logits);
  }
  return out;
}

/// The full lower bound (additive constant dropped), evaluated term by term.
inline double elbo(const Problem& p, const Params& q) {
  const ELog e = elog(q);
  double total = 0.0;
  for (std::size_t k = 0; k < p.K; ++k) {
    double c = q.u[k] - q.nu[k];
    for (std::size_t i = 0; i < p.T; ++i) c += q.phi[i][k];
    total += c * e.tau[k];
  }
  total += log_b(q.nu);
  for (std::size_t j = 0; j < p.W; ++j) {
    for (std::size_t s = 0; s < p.S; ++s) {
      double c = q.beta[j][s] - q.eta[j][s];
      for (std::size_t i = 0; i < p.T; ++i)
        if (p.y[i][j] >= 0) c += q.theta[j][i][s];
      total += c * e.pi[j][s];
    }
    total += log_b(q.eta[j]);
  }
  for (std::size_t s = 0; s < p.S; ++s)
    for (std::size_t k = 0; k < p.K; ++k) {
      for (std::size_t l = 0; l < p.K; ++l) {
        double c = q.a[s][k][l] - q.mu[s][k][l];
        for (std::size_t j = 0; j < p.W; ++j)
          for (std::size_t i = 0; i < p.T; ++i)
            if (p.y[i][j] == static_cast<int>(l)) c += q.phi[i][k] * q.theta[j][i][s];
        total += c * e.v[s][k][l];
      }
      total += log_b(q.mu[s][k]);
    }
  for (std::size_t i = 0; i < p.T; ++i)
    for (double x : q.phi[i])
      if (x > 0) total -= x * std::log(x);
  for (std::size_t j = 0; j < p.W; ++j)
    for (std::size_t i = 0; i < p.T; ++i) {
      if (p.y[i][j] < 0) continue;
      for (double x : q.theta[j][i])
        if (x > 0) total -= x * std::log(x);
    }
  return total;
}

// ---------------------------------------------------------------------------
// Dawid-Skene EM in the probability domain on a dense grid.

struct DsOutcome {
  Mat posterior;
  std::vector<double> objective;
  std::size_t iterations = 0;
};

inline DsOutcome dawid_skene(const Problem& p, double tol, std::size_t max_iter, double eps) {
  Mat post(p.T, Vec(p.K, 0.0));
  for (std::size_t i = 0; i < p.T; ++i) {
    double n = 0;
    for (std::size_t j = 0; j < p.W; ++j)
      if (p.y[i][j] >= 0) {
        post[i][p.y[i][j]] += 1;
        n += 1;
      }
    for (auto& x : post[i]) x = n > 0 ? x / n : 1.0 / p.K;
  }
  DsOutcome out;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Vec marg(p.K, eps);
    for (std::size_t i = 0; i < p.T; ++i)
      for (std::size_t k = 0; k < p.K; ++k) marg[k] += post[i][k];
    const double mz = sum(marg);
    for (auto& x : marg) x /= mz;
    Cube conf(p.W, Mat(p.K, Vec(p.K, eps)));
    for (std::size_t i = 0; i < p.T; ++i)
      for (std::size_t j = 0; j < p.W; ++j)
        if (p.y[i][j] >= 0)
          for (std::size_t k = 0; k < p.K; ++k) conf[j][k][p.y[i][j]] += post[i][k];
    for (auto& c : conf)
      for (auto& row : c) {
        const double z = sum(row);
        for (auto& x : row) x /= z;
      }
    double ll = 0.0;
    Mat next(p.T, Vec(p.K));
    for (std::size_t i = 0; i < p.T; ++i) {
      double evidence = 0.0;
      for (std::size_t k = 0; k < p.K; ++k) {
        double joint = marg[k];
        for (std::size_t j = 0; j < p.W; ++j)
          if (p.y[i][j] >= 0) joint *= conf[j][k][p.y[i][j]];
        next[i][k] = joint;
        evidence += joint;
      }
      for (auto& x : next[i]) x /= evidence;
      ll += std::log(evidence);
    }
    double penalty = 0.0;
    for (double x : marg) penalty += std::log(x);
    for (const auto& c : conf)
      for (const auto& row : c)
        for (double x : row) penalty += std::log(x);
    out.objective.push_back(ll + eps * penalty);
    double change = 0.0;
    for (std::size_t i = 0; i < p.T; ++i)
      for (std::size_t k = 0; k < p.K; ++k) change = std::max(change, std::abs(next[i][k] - post[i][k]));
    post = next;
    out.iterations = it;
    if (change < tol) break;
  }
  out.posterior = post;
  return out;
}

// ---------------------------------------------------------------------------
// Signed-rank null distribution by exhaustive enumeration of sign vectors.

inline double signed_rank_cdf_enumerated(const std::vector<double>& ranks, double s) {
  const std::size_t n = ranks.size();
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 0.0;
    for (std::size_t b = 0; b < n; ++b)
      if (mask >> b & 1u) w += ranks[b];
    if (w <= s + 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::uint64_t{1} << n);
}

}  // namespace oracle
