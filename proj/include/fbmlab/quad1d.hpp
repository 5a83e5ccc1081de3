#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace fbmlab::quad1d {

// Gauss 7 / Kronrod 15 pair on [-1,1], positive half: node, Gauss weight,
// Kronrod weight.
inline constexpr double kNodes[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529}};

template <class F>
double gk15(const F& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double g7 = kNodes[0][1] * f0;
  double k15 = kNodes[0][2] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = half * kNodes[i][0];
    const double fv = f(mid + dx) + f(mid - dx);
    g7 += kNodes[i][1] * fv;
    k15 += kNodes[i][2] * fv;
  }
  g7 *= half;
  k15 *= half;
  err = std::abs(k15 - g7);
  return k15;
}

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 20000;
};

/// Adaptive integration over the union of [pts[k], pts[k+1]]. Subdivides the
/// interval with the largest error estimate; ties broken by creation order.
template <class F>
double integrate(const F& f, const std::vector<double>& pts,
                 const Options& opt = {}) {
  if (pts.size() < 2) throw std::invalid_argument("need at least one interval");

  struct Seg {
    double a, b, val, err;
    long id;
  };
  auto worse = [](const Seg& x, const Seg& y) {
    if (x.err != y.err) return x.err < y.err;
    return x.id > y.id;
  };
  std::priority_queue<Seg, std::vector<Seg>, decltype(worse)> q(worse);

  long next_id = 0;
  double total = 0.0, total_err = 0.0;
  auto push = [&](double a, double b) {
    Seg s{a, b, 0.0, 0.0, next_id++};
    s.val = gk15(f, a, b, s.err);
    total += s.val;
    total_err += s.err;
    q.push(s);
  };
  for (size_t k = 0; k + 1 < pts.size(); ++k) push(pts[k], pts[k + 1]);

  int n = int(pts.size()) - 1;
  while (n < opt.max_intervals) {
    if (total_err <= opt.abs_tol || total_err <= opt.rel_tol * std::abs(total))
      break;
    Seg s = q.top();
    q.pop();
    total -= s.val;
    total_err -= s.err;
    const double m = 0.5 * (s.a + s.b);
    push(s.a, m);
    push(m, s.b);
    ++n;
  }
  return total;
}

template <class F>
double integrate(const F& f, double a, double b, const Options& opt = {}) {
  return integrate(f, std::vector<double>{a, b}, opt);
}

/// Geometric breakpoints from `inner` up to `outer`; resolves integrands
/// whose scale of variation is `inner` near the left endpoint.
inline std::vector<double> geometric_split(double inner, double outer,
                                           double factor = 4.0) {
  std::vector<double> pts{0.0};
  double x = std::min(inner, outer);
  while (x < outer) {
    pts.push_back(x);
    x *= factor;
  }
  pts.push_back(outer);
  return pts;
}

} // namespace fbmlab::quad1d
