#include "apnorm/phase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "apnorm/bounds.hpp"
#include "apnorm/detail/numeric.hpp"
#include "apnorm/error.hpp"

namespace apnorm {

namespace {

// Continuity defect tolerated between adjacent pieces before a build is
// rejected (unit tests hold constructions to 1e-12).
constexpr double kContinuitySlack = 1e-9;
// Pieces shorter than this cannot be resolved against 2*pi.
constexpr double kMinPiece = 1e-14;

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Sum of weighted piecewise-affine phases on the union of their knots.
PhaseFn weighted_sum(const std::vector<const PhaseFn*>& parts, const std::vector<double>& weights,
                     double perturbation, std::string name) {
  std::vector<double> knots;
  for (const auto* p : parts) knots.insert(knots.end(), p->knots().begin(), p->knots().end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<double> values(knots.size()), slopes(knots.size() - 1);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    detail::Accumulator acc;
    for (std::size_t m = 0; m < parts.size(); ++m) acc.add(weights[m] * parts[m]->value(knots[i]));
    values[i] = acc.value();
  }
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double mid = 0.5 * (knots[i] + knots[i + 1]);
    detail::Accumulator acc;
    for (std::size_t m = 0; m < parts.size(); ++m) acc.add(weights[m] * parts[m]->derivative(mid));
    slopes[i] = acc.value();
  }
  const int runs = count_monotone_runs(slopes);
  return PhaseFn::from_pieces(std::move(knots), std::move(values), std::move(slopes), 0, runs, perturbation,
                              std::move(name));
}

}  // namespace

PhaseFn PhaseFn::from_pieces(std::vector<double> knots, std::vector<double> values, std::vector<double> slopes,
                             int winding, int monotone_pieces, double perturbation, std::string name) {
  if (knots.size() < 2 || values.size() != knots.size() || slopes.size() + 1 != knots.size())
    throw ConstructionError("affine phase needs n+1 knots, n+1 values and n slopes");
  if (knots.front() != 0.0 || std::abs(knots.back() - kTwoPi) > 1e-12)
    throw DomainError("affine phase knots must span [0, 2*pi]");
  knots.back() = kTwoPi;
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw DomainError("affine phase knots must be strictly increasing");
  PhaseFn f;
  double sup = 0.0;
  for (double a : slopes) sup = std::max(sup, std::abs(winding + a));
  f.sup_deriv_ = sup;
  const double scale = std::max(1.0, max_abs(slopes) * kTwoPi);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double predicted = values[i] + slopes[i] * (knots[i + 1] - knots[i]);
    if (!(std::abs(predicted - values[i + 1]) <= kContinuitySlack * scale)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "affine pieces disagree at t = %.17g", knots[i + 1]);
      throw ConstructionError(buf);
    }
  }
  if (!(std::abs(values.back() - values.front()) <= kContinuitySlack * scale))
    throw DomainError("periodic part must return to its initial value (non-integer winding)");
  values.back() = values.front();
  f.knots_ = std::move(knots);
  f.values_ = std::move(values);
  f.slopes_ = std::move(slopes);
  f.winding_ = winding;
  f.monotone_pieces_ = monotone_pieces;
  f.perturbation_ = perturbation;
  f.name_ = std::move(name);
  return f;
}

PhaseFn PhaseFn::from_smooth(int winding, SmoothPart part, int monotone_pieces, std::string name) {
  if (!part.q || !part.dq) throw ConstructionError("smooth phase needs q and q'");
  PhaseFn f;
  f.winding_ = winding;
  f.sup_deriv_ = std::abs(winding) + part.sup_dq;
  f.monotone_pieces_ = monotone_pieces;
  f.smooth_ = std::move(part);
  f.name_ = std::move(name);
  return f;
}

const SmoothPart& PhaseFn::smooth() const {
  if (!smooth_) throw DispatchError("phase '" + name_ + "' has no smooth representation");
  return *smooth_;
}

std::size_t PhaseFn::piece_index(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto i = static_cast<std::ptrdiff_t>(it - knots_.begin()) - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(slopes_.size()) - 1));
}

double PhaseFn::base_value(double t) const {
  if (t < 0.0 || t > kTwoPi) t -= kTwoPi * std::floor(t / kTwoPi);
  if (smooth_) return smooth_->q(t);
  const std::size_t i = piece_index(t);
  // Measure from the nearer node so the value is exact at every knot.
  if (knots_[i + 1] - t < t - knots_[i]) return values_[i + 1] - slopes_[i] * (knots_[i + 1] - t);
  return values_[i] + slopes_[i] * (t - knots_[i]);
}

double PhaseFn::value(double t) const { return winding_ * t + base_value(t); }

double PhaseFn::derivative(double t) const {
  if (t < 0.0 || t > kTwoPi) t -= kTwoPi * std::floor(t / kTwoPi);
  if (smooth_) return winding_ + smooth_->dq(t);
  return winding_ + slopes_[piece_index(t)];
}

int count_monotone_runs(const std::vector<double>& slopes) {
  int runs = 1;
  int dir = 0;
  for (std::size_t i = 1; i < slopes.size(); ++i) {
    const double d = slopes[i] - slopes[i - 1];
    if (d == 0.0) continue;
    const int s = d > 0.0 ? 1 : -1;
    if (dir != 0 && s != dir) ++runs;
    dir = s;
  }
  return runs;
}

PhaseFn linear_phase(int slope, double offset) {
  return PhaseFn::from_pieces({0.0, kTwoPi}, {offset, offset}, {0.0}, slope, 1, 0.0, "linear");
}

PhaseFn cos_phase() {
  SmoothPart part;
  part.q = [](double t) { return std::cos(t); };
  part.dq = [](double t) { return -std::sin(t); };
  part.sup_dq = 1.0;
  part.sup_d2q = 1.0;
  // -sin t is monotone on two arcs of the circle.
  return PhaseFn::from_smooth(0, std::move(part), 2, "cos");
}

PhaseFn pl_phase(std::vector<double> breakpoints, std::vector<double> values) {
  if (breakpoints.size() < 2 || breakpoints.size() != values.size())
    throw DomainError("pl_phase needs matching breakpoint and value lists (at least two)");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1])) throw DomainError("pl_phase breakpoints must be strictly increasing");
  if (std::abs(breakpoints.front()) > 1e-12 || std::abs(breakpoints.back() - kTwoPi) > 1e-12)
    throw DomainError("pl_phase breakpoints must span [0, 2*pi]");
  breakpoints.front() = 0.0;
  breakpoints.back() = kTwoPi;
  const double turns = (values.back() - values.front()) / kTwoPi;
  const double w = std::round(turns);
  if (std::abs(turns - w) > 1e-9) throw DomainError("pl_phase values must be periodic modulo 2*pi*Z");
  std::vector<double> slopes(breakpoints.size() - 1);
  for (std::size_t i = 0; i < slopes.size(); ++i)
    slopes[i] = (values[i + 1] - values[i]) / (breakpoints[i + 1] - breakpoints[i]) - w;
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= w * breakpoints[i];
  const int pieces = static_cast<int>(slopes.size());
  return PhaseFn::from_pieces(std::move(breakpoints), std::move(values), std::move(slopes), static_cast<int>(w),
                              pieces, 0.0, "pl");
}

namespace {

struct PrimitiveNodes {
  std::vector<double> knots, values, slopes;
  double perturbation = 0.0;
};

// Primitive of the averaged psi on [0, rho_base] at the given depth.
PrimitiveNodes primitive_nodes(const Modulus& m, int depth, int base) {
  if (depth < 1) throw DomainError("cantor_primitive needs depth >= 1");
  const auto cl = CantorLevels::build(m, depth, base);
  const double L = cl.span();
  const auto cover = cl.cover(depth);
  const std::size_t half = cover.size() / 2;
  const double h = std::ldexp(1.0, -depth);
  const double shrink = detail::sinc(kPi * h);

  // Left half: interval i, then the gap after it (sigma = (i+1) h).
  std::vector<double> lk, ls;
  for (std::size_t i = 0; i < half; ++i) {
    lk.push_back(cover[i].lo);
    ls.push_back(detail::sin2pi((static_cast<double>(i) + 0.5) * h) * shrink);
    lk.push_back(cover[i].hi);
    if (i + 1 < half) ls.push_back(detail::sin2pi(static_cast<double>(i + 1) * h));
  }
  std::vector<double> lv(lk.size());
  lv[0] = 0.0;
  for (std::size_t i = 0; i + 1 < lk.size(); ++i) lv[i + 1] = lv[i] + ls[i] * (lk[i + 1] - lk[i]);

  // Right half mirrored: psi(L - t) = -psi(t) makes phi(L - t) = phi(t).
  PrimitiveNodes out;
  out.knots = lk;
  out.values = lv;
  out.slopes = ls;
  out.slopes.push_back(0.0);  // central gap, sigma = 1/2
  for (std::size_t i = lk.size(); i-- > 0;) {
    out.knots.push_back(L - lk[i]);
    out.values.push_back(lv[i]);
  }
  for (std::size_t i = ls.size(); i-- > 0;) out.slopes.push_back(-ls[i]);
  // The averaged psi differs from the ideal one by at most min(2 pi h, 2)
  // on the depth-J intervals, of total length 2^J rho_J.
  out.perturbation = std::min(kTwoPi * h, 2.0) * std::ldexp(cl.rho(depth), depth);
  return out;
}

// Below rho_{J-2} the averaged slopes inside depth-J intervals jump against
// the neighbouring gap slopes, so probing there measures the truncation.
int resolved_levels(int depth) { return std::max(depth - 2, 1); }

}  // namespace

PhaseFn cantor_primitive(const Modulus& m, int depth) {
  auto n = primitive_nodes(m, depth, 0);
  const int runs = count_monotone_runs(n.slopes);
  PhaseFn f = PhaseFn::from_pieces(std::move(n.knots), std::move(n.values), std::move(n.slopes), 0, runs,
                                   n.perturbation, "cantor");
  f.set_lip_cert({m, lip_estimate(f, m, resolved_levels(depth))});
  return f;
}

PhaseFn NestedPhase::partial_sum(int j) const {
  if (j < 0 || j > schedule.levels) throw DomainError("partial sum index out of range");
  std::vector<const PhaseFn*> parts;
  std::vector<double> weights;
  double perturbation = 0.0;
  for (int m = 0; m <= j; ++m) {
    parts.push_back(&components[m]);
    weights.push_back(schedule.epsilon[m]);
    perturbation += schedule.epsilon[m] * components[m].perturbation();
  }
  // |r_j| <= delta_j * pi: r_j vanishes at 0 and 2*pi and |r_j'| <= delta_j.
  perturbation += kPi * schedule.delta[j];
  return weighted_sum(parts, weights, perturbation, "nested");
}

double NestedPhase::remainder_bound(int j) const {
  if (j < 0 || j > schedule.levels) throw DomainError("remainder index out of range");
  return schedule.delta[j];
}

NestedPhase nested_phase(const Modulus& m, int levels, int depth) {
  if (levels < 1) throw DomainError("nested_phase needs at least one level");
  if (depth < levels) throw DomainError("nested_phase needs depth >= levels");
  NestedSchedule s;
  s.requested_levels = levels;
  const double chi1 = m.chi(m.rho(1));
  auto delta = [&](int j) { return 0.5 * m.chi(m.rho(j + 1)) / chi1; };

  std::vector<PhaseFn> comps;
  comps.push_back(cantor_primitive(m, depth));
  s.intervals.push_back({0.0, kTwoPi});
  s.epsilon.push_back(0.5);
  s.delta.push_back(delta(0));
  s.rho.push_back(kTwoPi);
  s.depth.push_back(depth);

  std::vector<Interval> free_gaps = CantorLevels::build(m, depth).gaps(depth);
  for (int lvl = 1; lvl <= levels; ++lvl) {
    // Largest complementary gap, leftmost on ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < free_gaps.size(); ++i) {
      const double a = free_gaps[i].length(), b = free_gaps[best].length();
      if (a > b || (a == b && free_gaps[i].lo < free_gaps[best].lo)) best = i;
    }
    const Interval g = free_gaps[best];
    const double rho_m = m.rho(lvl);
    const double len = std::min(std::ldexp(rho_m, -lvl), g.length() / 3.0);
    const double c = 0.5 * (g.lo + g.hi);
    const Interval I{c - 0.5 * len, c + 0.5 * len};
    const int d = std::max(depth - lvl, 2);

    auto n = primitive_nodes(m, d, lvl);
    const double squeeze = len / rho_m;  // |I_m| / rho_m
    std::vector<double> knots{0.0};
    std::vector<double> values{0.0};
    std::vector<double> slopes{0.0};
    for (std::size_t i = 0; i < n.knots.size(); ++i) {
      double t = I.lo + n.knots[i] * squeeze;
      if (i == 0) t = I.lo;
      if (i + 1 == n.knots.size()) t = I.hi;
      knots.push_back(t);
      values.push_back(n.values[i]);
    }
    for (double a : n.slopes) slopes.push_back(a / squeeze);
    slopes.push_back(0.0);
    knots.push_back(kTwoPi);
    values.push_back(0.0);
    bool resolvable = I.lo > g.lo && I.hi < g.hi;
    for (std::size_t i = 1; resolvable && i < knots.size(); ++i)
      resolvable = knots[i] - knots[i - 1] >= kMinPiece;
    if (!resolvable) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "level %d: gap of length %.3g cannot host a resolvable copy", lvl, g.length());
      s.stop_reason = buf;
      break;
    }
    const int runs = count_monotone_runs(slopes);
    comps.push_back(PhaseFn::from_pieces(std::move(knots), std::move(values), std::move(slopes), 0, runs,
                                         n.perturbation, "nested-component"));

    free_gaps.erase(free_gaps.begin() + static_cast<std::ptrdiff_t>(best));
    free_gaps.push_back({g.lo, I.lo});
    free_gaps.push_back({I.hi, g.hi});
    const auto sub = CantorLevels::build(m, d, lvl);
    for (const auto& gg : sub.gaps(d)) free_gaps.push_back({I.lo + gg.lo * squeeze, I.lo + gg.hi * squeeze});

    s.intervals.push_back(I);
    s.delta.push_back(delta(lvl));
    s.epsilon.push_back((s.delta[lvl - 1] - s.delta[lvl]) * len / rho_m);
    s.rho.push_back(rho_m);
    s.depth.push_back(d);
  }
  s.levels = static_cast<int>(comps.size()) - 1;

  NestedPhase out{PhaseFn::from_pieces({0.0, kTwoPi}, {0.0, 0.0}, {0.0}, 0, 1, 0.0, "nested"), std::move(s),
                  std::move(comps)};
  out.phase = out.partial_sum(out.schedule.levels);
  out.phase.set_lip_cert({m, lip_estimate(out.phase, m, resolved_levels(depth))});
  return out;
}

PhaseFn diffeo(const PhaseFn& phi, double eps) {
  if (phi.winding() != 0) throw PreconditionError("diffeo needs a phase with winding 0");
  if (!(eps >= 0.0) || !(eps * phi.sup_deriv() < 1.0))
    throw PreconditionError("diffeo needs 0 <= eps * sup|phi'| < 1");
  if (phi.is_smooth()) {
    const SmoothPart& p = phi.smooth();
    SmoothPart part;
    part.q = [q = p.q, eps](double t) { return eps * q(t); };
    part.dq = [dq = p.dq, eps](double t) { return eps * dq(t); };
    part.sup_dq = eps * p.sup_dq;
    part.sup_d2q = eps * p.sup_d2q;
    return PhaseFn::from_smooth(1, std::move(part), phi.monotone_pieces(), "diffeo(" + phi.name() + ")");
  }
  std::vector<double> values = phi.base_values(), slopes = phi.base_slopes();
  for (double& v : values) v *= eps;
  for (double& a : slopes) a *= eps;
  const int runs = eps == 0.0 ? 1 : phi.monotone_pieces();
  return PhaseFn::from_pieces(phi.knots(), std::move(values), std::move(slopes), 1, runs, eps * phi.perturbation(),
                              "diffeo(" + phi.name() + ")");
}

std::pair<PhaseFn, int> lift(const PhaseFn& f) { return {modulate(f, -f.winding()), f.winding()}; }

PhaseFn modulate(const PhaseFn& f, int m) {
  const int w = f.winding() + m;
  PhaseFn out = f.is_smooth() ? PhaseFn::from_smooth(w, f.smooth(), f.monotone_pieces(), f.name())
                              : PhaseFn::from_pieces(f.knots(), f.base_values(), f.base_slopes(), w,
                                                     f.monotone_pieces(), f.perturbation(), f.name());
  // phi' only shifts by a constant, so the Lip certificate carries over.
  if (f.lip_cert()) out.set_lip_cert(*f.lip_cert());
  return out;
}

double chord_deviation(const PhaseFn& phi, const Interval& I) {
  if (!(I.lo >= 0.0 && I.hi <= kTwoPi && I.lo < I.hi)) throw DomainError("chord_deviation needs I inside [0, 2 pi]");
  const double fa = phi.value(I.lo), fb = phi.value(I.hi);
  const double slope = (fb - fa) / (I.hi - I.lo);
  auto dev = [&](double t) { return std::abs(phi.value(t) - (fa + slope * (t - I.lo))); };
  double worst = 0.0;
  if (phi.is_affine()) {
    const auto& k = phi.knots();
    for (auto it = std::upper_bound(k.begin(), k.end(), I.lo); it != k.end() && *it < I.hi; ++it)
      worst = std::max(worst, dev(*it));
    return worst;
  }
  constexpr int kGrid = 4096;
  for (int i = 1; i < kGrid; ++i) worst = std::max(worst, dev(I.lo + (I.hi - I.lo) * i / kGrid));
  return worst;
}

}  // namespace apnorm
