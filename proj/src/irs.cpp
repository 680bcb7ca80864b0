#include "soficlab/irs.hpp"

#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace soficlab {

std::optional<std::string> pattern_inconsistency(const Window& W,
                                                 const std::string& bits) {
  if (bits.size() != W.size())
    return "pattern length " + std::to_string(bits.size()) +
           " does not match window size " + std::to_string(W.size());
  const Group& gr = *W.group();
  if (bits[(size_t)W.identity_index()] != '1') return "y(e) = 0";
  for (size_t i = 0; i < W.size(); ++i) {
    int inv = W.index_of(gr.inverse(W[i]));
    if (inv >= 0 && bits[i] != bits[(size_t)inv])
      return "y(" + gr.to_string(W[i]) + ") != y(inverse)";
  }
  for (size_t i = 0; i < W.size(); ++i) {
    if (bits[i] != '1') continue;
    for (size_t j = 0; j < W.size(); ++j) {
      if (bits[j] != '1') continue;
      int prod = W.index_of(gr.multiply(W[i], W[j]));
      if (prod >= 0 && bits[(size_t)prod] != '1')
        return "y(" + gr.to_string(W[i]) + ")=y(" + gr.to_string(W[j]) +
               ")=1 but y(product)=0";
    }
  }
  return std::nullopt;
}

PatternMeasure::PatternMeasure(Window window,
                               std::map<std::string, Rational> masses)
    : window_(std::move(window)), masses_(std::move(masses)) {
  Rational total(0, 1);
  size_t id_idx = (size_t)window_.identity_index();
  for (const auto& [bits, mass] : masses_) {
    if (bits.size() != window_.size())
      throw std::invalid_argument("pattern length does not match window");
    if (mass < Rational(0, 1))
      throw std::invalid_argument("negative pattern mass");
    total += mass;
    if (bits[id_idx] != '1') identity_violation_ += mass;
  }
  if (total != Rational(1, 1))
    throw std::invalid_argument("pattern masses must sum to 1, got " +
                                total.str());
}

Rational PatternMeasure::mass_of(const std::string& bits) const {
  auto it = masses_.find(bits);
  return it == masses_.end() ? Rational(0, 1) : it->second;
}

Rational PatternMeasure::total() const {
  Rational t(0, 1);
  for (const auto& [bits, mass] : masses_) t += mass;
  return t;
}

Rational PatternMeasure::marginal_ones(std::span<const int> idx) const {
  Rational t(0, 1);
  for (const auto& [bits, mass] : masses_) {
    bool all = true;
    for (int i : idx)
      if (bits[(size_t)i] != '1') {
        all = false;
        break;
      }
    if (all) t += mass;
  }
  return t;
}

Rational PatternMeasure::inconsistent_mass() const {
  Rational t(0, 1);
  for (const auto& [bits, mass] : masses_)
    if (pattern_inconsistency(window_, bits)) t += mass;
  return t;
}

void PatternMeasure::write_csv(std::ostream& os) const {
  os << "pattern,numerator,denominator\n";
  for (const auto& [bits, mass] : masses_)
    os << bits << "," << mass.num() << "," << mass.den() << "\n";
}

PatternMeasure empirical_irs(const ApproxHom& sigma, const Window& W) {
  uint32_t d = sigma.degree();
  std::vector<Permutation> imgs = sigma.evaluate_all(W.elements());
  std::unordered_map<std::string, long long> counts;
  std::string bits(W.size(), '0');
  for (uint32_t j = 0; j < d; ++j) {
    for (size_t i = 0; i < W.size(); ++i)
      bits[i] = imgs[i](j) == j ? '1' : '0';
    ++counts[bits];
  }
  std::map<std::string, Rational> masses;
  for (const auto& [pattern, count] : counts)
    masses.emplace(pattern, Rational(count, d));
  return PatternMeasure(W, std::move(masses));
}

Rational fixed_fraction(const ApproxHom& sigma, std::span<const Element> F) {
  std::vector<Permutation> imgs = sigma.evaluate_all(F);
  return fixed_fraction_joint(imgs);
}

Rational tv_distance(const PatternMeasure& m1, const PatternMeasure& m2) {
  if (!m1.window().same_window(m2.window()))
    throw std::invalid_argument("tv_distance: window mismatch");
  Rational sum(0, 1);
  for (const auto& [bits, mass] : m1.masses())
    sum += (mass - m2.mass_of(bits)).abs();
  for (const auto& [bits, mass] : m2.masses())
    if (m1.masses().find(bits) == m1.masses().end()) sum += mass;
  return sum / Rational(2, 1);
}

IRSWindowSpec::IRSWindowSpec(Window w,
                             std::vector<std::pair<std::string, Rational>> pats,
                             Provenance prov)
    : window(std::move(w)), patterns(std::move(pats)), provenance(prov) {
  Rational total(0, 1);
  for (const auto& [bits, weight] : patterns) {
    if (weight < Rational(0, 1))
      throw std::invalid_argument("negative IRS pattern weight");
    if (auto why = pattern_inconsistency(window, bits))
      throw std::invalid_argument("inconsistent IRS pattern " + bits + ": " +
                                  *why);
    total += weight;
  }
  if (total != Rational(1, 1))
    throw std::invalid_argument("IRS pattern weights must sum to 1, got " +
                                total.str());
}

IRSWindowSpec IRSWindowSpec::from_measure(const PatternMeasure& m,
                                          Provenance prov) {
  std::vector<std::pair<std::string, Rational>> pats(m.masses().begin(),
                                                     m.masses().end());
  return IRSWindowSpec(m.window(), std::move(pats), prov);
}

StatsMatchReport stats_match(const ApproxHom& sigma, const ApproxHom& psi,
                             std::span<const std::vector<Element>> family,
                             double tol) {
  StatsMatchReport rep;
  for (const auto& F : family) {
    StatsMatchReport::Row row;
    row.F = F;
    row.theta_sigma = fixed_fraction(sigma, F);
    row.theta_psi = fixed_fraction(psi, F);
    row.diff = (row.theta_sigma - row.theta_psi).abs();
    row.pass = row.diff.leq(tol);
    if (rep.max_diff < row.diff) rep.max_diff = row.diff;
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

ConjInvarianceReport conjugation_invariance_defect(const PatternMeasure& mu,
                                                   const Element& g) {
  const Window& W = mu.window();
  const Group& gr = *W.group();
  Element ginv = gr.inverse(g);

  std::vector<int> sub_idx;        // indices of W_g inside W
  std::vector<int> conj_idx;       // index of g^-1 h g for each h in W_g
  for (size_t i = 0; i < W.size(); ++i) {
    int ci = W.index_of(gr.conjugate(ginv, W[i]));
    if (ci >= 0) {
      sub_idx.push_back((int)i);
      conj_idx.push_back(ci);
    }
  }
  if (sub_idx.empty())
    throw std::runtime_error("conjugation sub-window is empty");

  std::map<std::string, Rational> marg, pushed;
  std::string key(sub_idx.size(), '0');
  for (const auto& [bits, mass] : mu.masses()) {
    for (size_t t = 0; t < sub_idx.size(); ++t) key[t] = bits[(size_t)sub_idx[t]];
    auto [it, fresh] = marg.emplace(key, mass);
    if (!fresh) it->second += mass;
    for (size_t t = 0; t < sub_idx.size(); ++t) key[t] = bits[(size_t)conj_idx[t]];
    auto [it2, fresh2] = pushed.emplace(key, mass);
    if (!fresh2) it2->second += mass;
  }

  Rational sum(0, 1);
  for (const auto& [bits, mass] : marg) {
    auto it = pushed.find(bits);
    sum += (mass - (it == pushed.end() ? Rational(0, 1) : it->second)).abs();
  }
  for (const auto& [bits, mass] : pushed)
    if (marg.find(bits) == marg.end()) sum += mass;

  ConjInvarianceReport rep;
  rep.defect = sum / Rational(2, 1);
  rep.coverage = Rational((long long)sub_idx.size(), (long long)W.size());
  rep.subwindow_size = sub_idx.size();
  return rep;
}

}  // namespace soficlab
