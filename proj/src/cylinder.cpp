#include "soficlab/cylinder.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "soficlab/parallel.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

StepFunction::StepFunction(int bins, std::vector<double> values)
    : bins_(bins), values_(std::move(values)) {
  if (bins_ < 1 || (size_t)bins_ != values_.size())
    throw std::invalid_argument("step function needs one value per bin");
  for (double v : values_)
    if (!(v >= 0.0))
      throw std::invalid_argument("step function values must be >= 0");
}

StepFunction StepFunction::constant(double value, int bins) {
  return StepFunction(bins, std::vector<double>((size_t)bins, value));
}

StepFunction StepFunction::indicator(int bins, std::span<const int> members) {
  std::vector<double> v((size_t)bins, 0.0);
  for (int m : members) {
    if (m < 0 || m >= bins) throw std::invalid_argument("bin out of range");
    v[(size_t)m] = 1.0;
  }
  return StepFunction(bins, std::move(v));
}

StepFunction StepFunction::lower_indicator(int bins, int upto) {
  std::vector<double> v((size_t)bins, 0.0);
  for (int i = 0; i < upto && i < bins; ++i) v[(size_t)i] = 1.0;
  return StepFunction(bins, std::move(v));
}

double StepFunction::operator()(double t) const {
  int b = (int)(t * bins_);
  b = std::clamp(b, 0, bins_ - 1);
  return values_[(size_t)b];
}

double StepFunction::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / bins_;
}

double StepFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

StepFunction StepFunction::refined(int new_bins) const {
  if (new_bins % bins_ != 0)
    throw std::invalid_argument("refinement must be a multiple of bins");
  int rep = new_bins / bins_;
  std::vector<double> v((size_t)new_bins);
  for (int b = 0; b < bins_; ++b)
    for (int r = 0; r < rep; ++r) v[(size_t)(b * rep + r)] = values_[(size_t)b];
  return StepFunction(new_bins, std::move(v));
}

double integral_of_product(std::span<const StepFunction* const> fs) {
  if (fs.empty()) return 1.0;
  long long l = 1;
  for (const StepFunction* f : fs) {
    l = std::lcm(l, (long long)f->bins());
    if (l > (1 << 20))
      throw std::invalid_argument("bin grids too fine to refine jointly");
  }
  int bins = (int)l;
  double sum = 0.0;
  for (int b = 0; b < bins; ++b) {
    double prod = 1.0;
    for (const StepFunction* f : fs)
      prod *= f->values()[(size_t)(b / (bins / f->bins()))];
    sum += prod;
  }
  return sum / bins;
}

double integral_of_product(std::span<const StepFunction> fs) {
  std::vector<const StepFunction*> ptrs;
  ptrs.reserve(fs.size());
  for (const auto& f : fs) ptrs.push_back(&f);
  return integral_of_product(std::span<const StepFunction* const>(ptrs));
}

double CylinderFunction::sup_bound() const {
  double b = 1.0;
  for (const auto& [g, f] : labels) b *= f.sup_norm();
  return b;
}

void CylinderFunction::require_distinct() const {
  std::set<Element> e;
  for (const auto& [g, f] : labels)
    if (!e.insert(g).second)
      throw std::invalid_argument("duplicate element in label window");
  std::set<Element> bf(bits.begin(), bits.end());
  if (bf.size() != bits.size())
    throw std::invalid_argument("duplicate element in bit window");
}

Labels sample_labels(uint32_t degree, uint64_t seed) {
  Labels l;
  l.degree = degree;
  l.seed = seed;
  l.provenance = "counter-rng(seed=" + std::to_string(seed) + ")";
  l.x.resize(degree);
  uint64_t key = derive_stream(seed, 0x4C4142454C53ULL);  // "LABELS"
  parallel_for(degree, [&](int64_t b, int64_t e) {
    for (int64_t j = b; j < e; ++j)
      l.x[(size_t)j] = unit_double(keyed_u64(key, (uint64_t)j));
  });
  return l;
}

Microstate::Microstate(const ApproxHom& sigma, const Labels& labels,
                       std::span<const Element> elems)
    : x_(&labels.x), degree_(sigma.degree()) {
  if (labels.degree != sigma.degree())
    throw std::invalid_argument("labels degree does not match sigma");
  perms_ = sigma.evaluate_all(elems);
  inverses_.reserve(perms_.size());
  for (const auto& p : perms_) inverses_.push_back(p.inverse());
}

}  // namespace soficlab
