#include "soficlab/relation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace soficlab {

namespace {

std::vector<int> merge_bins(const CylinderSet::BinUnion& a,
                            const CylinderSet::BinUnion& b) {
  std::vector<int> out;
  std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(),
                        b.members.end(), std::back_inserter(out));
  return out;
}

Rational symmetric_difference_mass(const std::vector<uint32_t>& a,
                                   const std::vector<uint32_t>& b,
                                   uint32_t degree) {
  std::vector<uint32_t> sym;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(sym));
  return Rational((long long)sym.size(), degree);
}

}  // namespace

CylinderSet CylinderSet::full() {
  CylinderSet s;
  s.name = "full";
  return s;
}

CylinderSet CylinderSet::bit(const Element& g, bool value) {
  CylinderSet s;
  s.bit_constraints.emplace_back(g, value);
  return s;
}

CylinderSet CylinderSet::label_bins(const Element& g, int bins,
                                    std::vector<int> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (int m : members)
    if (m < 0 || m >= bins) throw std::invalid_argument("bin out of range");
  CylinderSet s;
  s.label_constraints.emplace_back(g, BinUnion{bins, std::move(members)});
  return s;
}

void CylinderSet::canonicalize() {
  std::sort(bit_constraints.begin(), bit_constraints.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(label_constraints.begin(), label_constraints.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

std::string CylinderSet::canonical_key(const Group& gr) const {
  if (infeasible) return "<empty>";
  CylinderSet c = *this;
  c.canonicalize();
  std::ostringstream os;
  for (const auto& [g, v] : c.bit_constraints)
    os << "b" << gr.to_string(g) << "=" << (v ? 1 : 0) << ";";
  for (const auto& [g, u] : c.label_constraints) {
    os << "l" << gr.to_string(g) << "@" << u.bins << ":";
    for (int m : u.members) os << m << ",";
    os << ";";
  }
  return os.str();
}

CylinderSet CylinderSet::intersect(const CylinderSet& other) const {
  CylinderSet out = *this;
  out.name = "";
  out.infeasible = infeasible || other.infeasible;
  for (const auto& [g, v] : other.bit_constraints) {
    auto it = std::find_if(out.bit_constraints.begin(),
                           out.bit_constraints.end(),
                           [&](const auto& c) { return c.first == g; });
    if (it == out.bit_constraints.end())
      out.bit_constraints.emplace_back(g, v);
    else if (it->second != v)
      out.infeasible = true;
  }
  for (const auto& [g, u] : other.label_constraints) {
    auto it = std::find_if(out.label_constraints.begin(),
                           out.label_constraints.end(),
                           [&](const auto& c) { return c.first == g; });
    if (it == out.label_constraints.end()) {
      out.label_constraints.emplace_back(g, u);
    } else {
      if (it->second.bins != u.bins)
        throw std::invalid_argument("cylinder sets use different bin grids");
      it->second.members = merge_bins(it->second, u);
      if (it->second.members.empty()) out.infeasible = true;
    }
  }
  out.canonicalize();
  return out;
}

CylinderSet CylinderSet::translated(const Group& gr, const Element& g) const {
  CylinderSet out;
  out.infeasible = infeasible;
  for (const auto& [b, v] : bit_constraints)
    out.bit_constraints.emplace_back(gr.conjugate(g, b), v);
  for (const auto& [h, u] : label_constraints)
    out.label_constraints.emplace_back(gr.multiply(g, h), u);
  out.canonicalize();
  return out;
}

std::vector<std::pair<double, CylinderFunction>>
CylinderSet::indicator_expansion(std::span<const Element> extra_bits) const {
  if (infeasible) return {};
  std::vector<Element> positive;
  std::vector<Element> negative;
  for (const auto& [g, v] : bit_constraints)
    (v ? positive : negative).push_back(g);
  for (const Element& g : extra_bits) positive.push_back(g);

  CylinderFunction base;
  for (const auto& [g, u] : label_constraints)
    base.labels.emplace_back(g, StepFunction::indicator(u.bins, u.members));

  std::vector<std::pair<double, CylinderFunction>> terms;
  size_t subsets = (size_t)1 << negative.size();
  for (size_t mask = 0; mask < subsets; ++mask) {
    CylinderFunction f = base;
    std::vector<Element> bits = positive;
    int parity = 0;
    for (size_t i = 0; i < negative.size(); ++i)
      if (mask & (1u << i)) {
        bits.push_back(negative[i]);
        ++parity;
      }
    std::sort(bits.begin(), bits.end());
    bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
    f.bits = std::move(bits);
    terms.emplace_back(parity % 2 == 0 ? 1.0 : -1.0, std::move(f));
  }
  return terms;
}

const std::vector<uint32_t>* SoficApproxData::find_set(
    const Group& gr, const CylinderSet& b) const {
  auto it = key_index.find(b.canonical_key(gr));
  return it == key_index.end() ? nullptr : &sets[it->second].second;
}

const Permutation& SoficApproxData::perm_of(const Element& g) const {
  int idx = element_window.index_of(g);
  if (idx < 0)
    throw std::invalid_argument("element " + group->to_string(g) +
                                " has no stored permutation");
  return perms[(size_t)idx];
}

void SoficApproxData::index_sets() {
  key_index.clear();
  for (size_t i = 0; i < sets.size(); ++i)
    key_index.emplace(sets[i].first.canonical_key(*group), i);
}

SoficApproxData export_relation_data(const ApproxHom& sigma, const Labels& x,
                                     std::span<const CylinderSet> family,
                                     const Window& element_window) {
  if (x.degree != sigma.degree())
    throw std::invalid_argument("labels degree mismatch");
  SoficApproxData data;
  data.group = sigma.group();
  data.degree = sigma.degree();
  data.element_window = element_window;
  data.perms = sigma.evaluate_all(element_window.elements());

  for (const CylinderSet& b : family) {
    std::vector<uint32_t> members;
    if (!b.infeasible) {
      std::vector<Permutation> bit_perms;
      std::vector<Permutation> label_inv;
      for (const auto& [g, v] : b.bit_constraints)
        bit_perms.push_back(sigma.evaluate(g));
      for (const auto& [g, u] : b.label_constraints)
        label_inv.push_back(sigma.evaluate(g).inverse());
      for (uint32_t j = 0; j < data.degree; ++j) {
        bool in = true;
        for (size_t t = 0; t < bit_perms.size() && in; ++t)
          in = (bit_perms[t](j) == j) == b.bit_constraints[t].second;
        for (size_t t = 0; t < label_inv.size() && in; ++t) {
          const auto& u = b.label_constraints[t].second;
          int bin = std::clamp((int)(x.x[label_inv[t](j)] * u.bins), 0,
                               u.bins - 1);
          in = std::binary_search(u.members.begin(), u.members.end(), bin);
        }
        if (in) members.push_back(j);
      }
    }
    data.sets.emplace_back(b, std::move(members));
  }
  data.index_sets();
  return data;
}

Rational intersection_defect(const SoficApproxData& data, const CylinderSet& b1,
                             const CylinderSet& b2) {
  const Group& gr = *data.group;
  const auto* r1 = data.find_set(gr, b1);
  const auto* r2 = data.find_set(gr, b2);
  const auto* r12 = data.find_set(gr, b1.intersect(b2));
  if (!r1 || !r2 || !r12)
    throw std::invalid_argument("intersection_defect: set missing from family");
  std::vector<uint32_t> meet;
  std::set_intersection(r1->begin(), r1->end(), r2->begin(), r2->end(),
                        std::back_inserter(meet));
  return symmetric_difference_mass(*r12, meet, data.degree);
}

double trace_defect(const SoficApproxData& data, const CylinderSet& b,
                    const Element& g, const IRSWindowSpec& theta) {
  const Group& gr = *data.group;
  const auto* rb = data.find_set(gr, b);
  if (!rb) throw std::invalid_argument("trace_defect: set missing from family");
  const Permutation& pg = data.perm_of(g);
  long long fixed = 0;
  for (uint32_t j : *rb)
    if (pg(j) == j) ++fixed;
  double lhs = Rational(fixed, data.degree).to_double();

  double rhs = 0.0;
  std::vector<Element> extra{g};
  for (const auto& [sign, f] : b.indicator_expansion(extra))
    rhs += sign * mu_theta(f, theta);
  return std::fabs(lhs - rhs);
}

Rational relation_equivariance_defect(const SoficApproxData& data,
                                      const CylinderSet& b, const Element& g) {
  const Group& gr = *data.group;
  const auto* rb = data.find_set(gr, b);
  const auto* rgb = data.find_set(gr, b.translated(gr, g));
  if (!rb || !rgb)
    throw std::invalid_argument("equivariance_defect: set missing from family");
  const Permutation& pg = data.perm_of(g);
  std::vector<uint32_t> moved;
  moved.reserve(rb->size());
  for (uint32_t j : *rb) moved.push_back(pg(j));
  std::sort(moved.begin(), moved.end());
  return symmetric_difference_mass(*rgb, moved, data.degree);
}

FullReport full_report(const SoficApproxData& data,
                       std::span<const CylinderSet> family,
                       std::span<const Element> test_elements,
                       const IRSWindowSpec& theta,
                       const RelationTolerances& tol) {
  const Group& gr = *data.group;
  FullReport rep;
  rep.notes.push_back(
      "trace and equivariance checks cover group translations only; "
      "full-group elements built from partitions are out of scope");
  if (family.empty())
    rep.notes.push_back("warning: empty family, checks are vacuous");

  // Homomorphism defect of the stored permutations over window pairs.
  const Window& W = data.element_window;
  for (const Element& g : test_elements) {
    for (const Element& h : test_elements) {
      Element prod = gr.multiply(g, h);
      if (W.index_of(prod) < 0) {
        rep.closure_violations.push_back("product " + gr.to_string(prod) +
                                         " outside the stored window");
        continue;
      }
      Rational v =
          hamming(data.perm_of(prod), compose(data.perm_of(g), data.perm_of(h)));
      FullReport::Row row;
      row.kind = "homomorphism";
      row.params = gr.to_string(g) + "," + gr.to_string(h);
      row.value = v.to_double();
      row.tolerance = tol.homomorphism;
      row.exact = true;
      row.pass = v.leq(tol.homomorphism);
      rep.rows.push_back(std::move(row));
    }
  }

  for (size_t i = 0; i < family.size(); ++i) {
    for (size_t j = i; j < family.size(); ++j) {
      CylinderSet meet = family[i].intersect(family[j]);
      if (!data.find_set(gr, meet)) {
        rep.closure_violations.push_back("intersection of {" +
                                         family[i].canonical_key(gr) + "} and {" +
                                         family[j].canonical_key(gr) +
                                         "} missing from family");
        continue;
      }
      Rational v = intersection_defect(data, family[i], family[j]);
      FullReport::Row row;
      row.kind = "intersection";
      row.params = family[i].name + "&" + family[j].name;
      row.value = v.to_double();
      row.tolerance = tol.intersection;
      row.exact = true;
      row.pass = v.leq(tol.intersection);
      rep.rows.push_back(std::move(row));
    }
  }

  for (const CylinderSet& b : family) {
    for (const Element& g : test_elements) {
      {
        FullReport::Row row;
        row.kind = "trace";
        row.params = b.name + "|" + gr.to_string(g);
        row.value = trace_defect(data, b, g, theta);
        row.tolerance = tol.trace;
        row.pass = row.value <= tol.trace;
        rep.rows.push_back(std::move(row));
      }
      CylinderSet gb = b.translated(gr, g);
      if (!data.find_set(gr, gb)) {
        rep.closure_violations.push_back("translate of {" + b.canonical_key(gr) +
                                         "} by " + gr.to_string(g) +
                                         " missing from family");
        continue;
      }
      Rational v = relation_equivariance_defect(data, b, g);
      FullReport::Row row;
      row.kind = "equivariance";
      row.params = b.name + "|" + gr.to_string(g);
      row.value = v.to_double();
      row.tolerance = tol.equivariance;
      row.exact = true;
      row.pass = v.leq(tol.equivariance);
      rep.rows.push_back(std::move(row));
    }
  }

  rep.pass = rep.closure_violations.empty();
  for (const auto& row : rep.rows) rep.pass = rep.pass && row.pass;
  return rep;
}

}  // namespace soficlab
