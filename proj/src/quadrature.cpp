#include "threshdet/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "threshdet/errors.hpp"

namespace threshdet {

namespace {

// 15-point Kronrod nodes on [-1, 1] (positive half) with the embedded
// 7-point Gauss rule; values from QUADPACK dqk15.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

// QUADPACK-style rule application with its scaled error estimate.
Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[15];
  const double fc = f(center);
  fv[14] = fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv[j] = f(center - dx);
    fv[7 + j] = f(center + dx);
  }

  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = std::fabs(resk);
  for (int j = 0; j < 7; ++j) {
    const double fsum = fv[j] + fv[7 + j];
    resk += kWgk[j] * fsum;
    resabs += kWgk[j] * (std::fabs(fv[j]) + std::fabs(fv[7 + j]));
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
  }

  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::fabs(fv[j] - reskh) + std::fabs(fv[7 + j] - reskh));

  resabs *= std::fabs(half);
  resasc *= std::fabs(half);
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double uflow = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  if (resabs > uflow) err = std::max(err, std::numeric_limits<double>::epsilon() * 50.0 * resabs);

  return {a, b, resk * half, err};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lower, double upper,
                                    double abs_tol, double rel_tol,
                                    std::span<const double> breakpoints,
                                    int max_intervals) {
  if (!(std::isfinite(lower) && std::isfinite(upper)))
    throw DomainError("integrate_adaptive: non-finite interval");
  if (!(abs_tol > 0.0 || rel_tol > 0.0))
    throw DomainError("integrate_adaptive: need a positive tolerance");
  if (upper < lower) throw DomainError("integrate_adaptive: upper < lower");
  if (upper == lower) return {0.0, 0.0, 0, 0};

  std::vector<double> knots;
  knots.push_back(lower);
  for (double p : breakpoints)
    if (p > lower && p < upper) knots.push_back(p);
  knots.push_back(upper);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::priority_queue<Segment> queue;
  double total = 0.0, total_err = 0.0;
  int evaluations = 0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    Segment s = gk15(f, knots[i], knots[i + 1]);
    evaluations += 15;
    total += s.value;
    total_err += s.error;
    queue.push(s);
  }

  while (total_err > std::max(abs_tol, rel_tol * std::fabs(total)) &&
         static_cast<int>(queue.size()) < max_intervals) {
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval no longer splittable in double precision
      queue.push(worst);
      break;
    }
    Segment leftseg = gk15(f, worst.a, mid);
    Segment rightseg = gk15(f, mid, worst.b);
    evaluations += 30;
    total += leftseg.value + rightseg.value - worst.value;
    total_err += leftseg.error + rightseg.error - worst.error;
    queue.push(leftseg);
    queue.push(rightseg);
  }

  if (total_err > std::max(abs_tol, rel_tol * std::fabs(total))) {
    std::ostringstream msg;
    msg << "integrate_adaptive: no convergence on [" << lower << ", " << upper
        << "]: error " << total_err << " > tolerance "
        << std::max(abs_tol, rel_tol * std::fabs(total)) << " after "
        << queue.size() << " intervals (" << evaluations << " evaluations)";
    throw NumericalError(msg.str());
  }

  return {total, total_err, evaluations, static_cast<int>(queue.size())};
}

}  // namespace threshdet
