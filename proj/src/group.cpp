#include "soficlab/group.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace soficlab {

namespace {

const char* kFreeLetters = "abcdefghijklmnopqrstuvwxyz";

long long mod_floor(long long a, long long m) {
  long long r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::string GroupSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case GroupKind::Lattice:
      os << "Z^" << rank;
      break;
    case GroupKind::FiniteAbelian: {
      os << "FA(";
      for (size_t i = 0; i < moduli.size(); ++i)
        os << (i ? "x" : "") << "Z/" << moduli[i];
      os << ")";
      break;
    }
    case GroupKind::Heisenberg:
      os << "H3(Z)";
      break;
    case GroupKind::Free:
      os << "F_" << rank;
      break;
  }
  return os.str();
}

Group::Group(GroupSpec spec) : spec_(std::move(spec)) {
  switch (spec_.kind) {
    case GroupKind::Lattice: {
      if (spec_.rank < 1) throw std::invalid_argument("lattice rank must be >= 1");
      for (int i = 0; i < spec_.rank; ++i) {
        Element plus{std::vector<long long>(spec_.rank, 0)};
        plus.v[i] = 1;
        Element minus{std::vector<long long>(spec_.rank, 0)};
        minus.v[i] = -1;
        gens_.push_back(plus);
        gens_.push_back(minus);
        gen_inv_.push_back((int)gen_inv_.size() + 1);
        gen_inv_.push_back((int)gen_inv_.size() - 1);
      }
      break;
    }
    case GroupKind::FiniteAbelian: {
      if (spec_.moduli.empty())
        throw std::invalid_argument("finite abelian group needs moduli");
      for (long long m : spec_.moduli)
        if (m < 1) throw std::invalid_argument("moduli must be positive");
      int n = (int)spec_.moduli.size();
      for (int i = 0; i < n; ++i) {
        long long m = spec_.moduli[i];
        if (m == 1) continue;  // trivial factor contributes no generator
        Element plus{std::vector<long long>(n, 0)};
        plus.v[i] = 1;
        if (m == 2) {
          gens_.push_back(plus);
          gen_inv_.push_back((int)gen_inv_.size());  // self-inverse
        } else {
          Element minus{std::vector<long long>(n, 0)};
          minus.v[i] = m - 1;
          gens_.push_back(plus);
          gens_.push_back(minus);
          gen_inv_.push_back((int)gen_inv_.size() + 1);
          gen_inv_.push_back((int)gen_inv_.size() - 1);
        }
      }
      break;
    }
    case GroupKind::Heisenberg: {
      gens_ = {Element{{1, 0, 0}}, Element{{-1, 0, 0}}, Element{{0, 1, 0}},
               Element{{0, -1, 0}}};
      gen_inv_ = {1, 0, 3, 2};
      break;
    }
    case GroupKind::Free: {
      if (spec_.rank < 1) throw std::invalid_argument("free rank must be >= 1");
      if (spec_.rank > 26) throw std::invalid_argument("free rank too large");
      for (int i = 1; i <= spec_.rank; ++i) {
        gens_.push_back(Element{{i}});
        gens_.push_back(Element{{-i}});
        gen_inv_.push_back((int)gen_inv_.size() + 1);
        gen_inv_.push_back((int)gen_inv_.size() - 1);
      }
      break;
    }
  }
}

std::shared_ptr<const Group> Group::lattice(int k) {
  return from_spec(GroupSpec{GroupKind::Lattice, k, {}});
}

std::shared_ptr<const Group> Group::finite_abelian(std::vector<long long> moduli) {
  return from_spec(GroupSpec{GroupKind::FiniteAbelian, (int)moduli.size(),
                             std::move(moduli)});
}

std::shared_ptr<const Group> Group::heisenberg() {
  return from_spec(GroupSpec{GroupKind::Heisenberg, 3, {}});
}

std::shared_ptr<const Group> Group::free_group(int rank) {
  return from_spec(GroupSpec{GroupKind::Free, rank, {}});
}

std::shared_ptr<const Group> Group::from_spec(const GroupSpec& spec) {
  return std::shared_ptr<const Group>(new Group(spec));
}

bool Group::is_abelian() const {
  switch (spec_.kind) {
    case GroupKind::Lattice:
    case GroupKind::FiniteAbelian:
      return true;
    case GroupKind::Heisenberg:
      return false;
    case GroupKind::Free:
      return spec_.rank == 1;
  }
  return false;
}

bool Group::is_amenable() const {
  return spec_.kind != GroupKind::Free || spec_.rank == 1;
}

Element Group::identity() const {
  switch (spec_.kind) {
    case GroupKind::Lattice:
      return Element{std::vector<long long>(spec_.rank, 0)};
    case GroupKind::FiniteAbelian:
      return Element{std::vector<long long>(spec_.moduli.size(), 0)};
    case GroupKind::Heisenberg:
      return Element{{0, 0, 0}};
    case GroupKind::Free:
      return Element{{}};
  }
  return Element{};
}

bool Group::is_identity(const Element& a) const { return a == identity(); }

void Group::validate(const Element& a) const {
  switch (spec_.kind) {
    case GroupKind::Lattice:
      if ((int)a.v.size() != spec_.rank)
        throw std::invalid_argument("element arity mismatch for " + spec_.describe());
      return;
    case GroupKind::FiniteAbelian: {
      if (a.v.size() != spec_.moduli.size())
        throw std::invalid_argument("element arity mismatch for " + spec_.describe());
      for (size_t i = 0; i < a.v.size(); ++i)
        if (a.v[i] < 0 || a.v[i] >= spec_.moduli[i])
          throw std::invalid_argument("residue out of range for " + spec_.describe());
      return;
    }
    case GroupKind::Heisenberg:
      if (a.v.size() != 3)
        throw std::invalid_argument("element arity mismatch for H3(Z)");
      return;
    case GroupKind::Free: {
      for (size_t i = 0; i < a.v.size(); ++i) {
        long long l = a.v[i];
        if (l == 0 || l > spec_.rank || l < -spec_.rank)
          throw std::invalid_argument("bad letter in free word");
        if (i + 1 < a.v.size() && a.v[i + 1] == -l)
          throw std::invalid_argument("word is not freely reduced");
      }
      return;
    }
  }
}

Element Group::multiply(const Element& a, const Element& b) const {
  validate(a);
  validate(b);
  switch (spec_.kind) {
    case GroupKind::Lattice: {
      Element r = a;
      for (int i = 0; i < spec_.rank; ++i) r.v[i] += b.v[i];
      return r;
    }
    case GroupKind::FiniteAbelian: {
      Element r = a;
      for (size_t i = 0; i < r.v.size(); ++i)
        r.v[i] = mod_floor(r.v[i] + b.v[i], spec_.moduli[i]);
      return r;
    }
    case GroupKind::Heisenberg:
      return Element{{a.v[0] + b.v[0], a.v[1] + b.v[1],
                      a.v[2] + b.v[2] + a.v[0] * b.v[1]}};
    case GroupKind::Free: {
      std::vector<long long> w = a.v;
      for (long long l : b.v) {
        if (!w.empty() && w.back() == -l)
          w.pop_back();
        else
          w.push_back(l);
      }
      return Element{std::move(w)};
    }
  }
  return Element{};
}

Element Group::inverse(const Element& a) const {
  validate(a);
  switch (spec_.kind) {
    case GroupKind::Lattice: {
      Element r = a;
      for (auto& x : r.v) x = -x;
      return r;
    }
    case GroupKind::FiniteAbelian: {
      Element r = a;
      for (size_t i = 0; i < r.v.size(); ++i)
        r.v[i] = mod_floor(-r.v[i], spec_.moduli[i]);
      return r;
    }
    case GroupKind::Heisenberg:
      return Element{{-a.v[0], -a.v[1], a.v[0] * a.v[1] - a.v[2]}};
    case GroupKind::Free: {
      std::vector<long long> w(a.v.rbegin(), a.v.rend());
      for (auto& l : w) l = -l;
      return Element{std::move(w)};
    }
  }
  return Element{};
}

Element Group::conjugate(const Element& g, const Element& h) const {
  return multiply(multiply(g, h), inverse(g));
}

std::string Group::to_string(const Element& a) const {
  if (spec_.kind == GroupKind::Free) {
    if (a.v.empty()) return "e";
    std::ostringstream os;
    for (size_t i = 0; i < a.v.size(); ++i) {
      if (i) os << " ";
      long long l = a.v[i];
      os << kFreeLetters[(l < 0 ? -l : l) - 1];
      if (l < 0) os << "^-1";
    }
    return os.str();
  }
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < a.v.size(); ++i) os << (i ? "," : "") << a.v[i];
  os << ")";
  return os.str();
}

Window Group::ball(int radius, size_t size_cap) const {
  return Window::ball_of(shared_from_this(), radius, size_cap);
}

std::vector<int> Group::geodesic_word(const Element& g, int max_length) const {
  validate(g);
  if (spec_.kind == GroupKind::Free) {
    // The reduced word is the unique geodesic.
    if ((int)g.v.size() > max_length)
      throw std::runtime_error("geodesic word exceeds length cap");
    std::vector<int> word;
    word.reserve(g.v.size());
    for (long long l : g.v)
      word.push_back(l > 0 ? 2 * (int)(l - 1) : 2 * (int)(-l - 1) + 1);
    return word;
  }
  if (is_identity(g)) return {};
  // BFS by right multiplication; first discovery gives the
  // lexicographically least geodesic.
  std::unordered_map<Element, std::pair<int, int>, ElementHash> prev;  // elem -> (parent gen, depth marker)
  std::unordered_map<Element, Element, ElementHash> parent_elem;
  std::deque<Element> frontier{identity()};
  prev[identity()] = {-1, 0};
  for (int depth = 1; depth <= max_length; ++depth) {
    std::deque<Element> next;
    for (const Element& w : frontier) {
      for (size_t s = 0; s < gens_.size(); ++s) {
        Element p = multiply(w, gens_[s]);
        if (prev.count(p)) continue;
        prev[p] = {(int)s, depth};
        parent_elem.emplace(p, w);
        if (p == g) {
          std::vector<int> word;
          Element cur = p;
          while (!is_identity(cur)) {
            word.push_back(prev[cur].first);
            cur = parent_elem.at(cur);
          }
          std::reverse(word.begin(), word.end());
          return word;
        }
        next.push_back(std::move(p));
      }
    }
    frontier.swap(next);
  }
  throw std::runtime_error("element " + to_string(g) +
                           " not reachable within length cap " +
                           std::to_string(max_length));
}

Window Window::ball_of(std::shared_ptr<const Group> g, int radius,
                       size_t size_cap) {
  if (radius < 0) throw std::invalid_argument("ball radius must be >= 0");
  Window w;
  w.group_ = g;
  w.radius_ = radius;
  w.elems_.push_back(g->identity());
  w.index_[g->identity()] = 0;
  w.parent_.push_back(-1);
  w.genidx_.push_back(-1);
  size_t level_begin = 0;
  auto gens = g->generators();
  for (int depth = 1; depth <= radius; ++depth) {
    size_t level_end = w.elems_.size();
    for (size_t i = level_begin; i < level_end; ++i) {
      for (size_t s = 0; s < gens.size(); ++s) {
        Element p = g->multiply(w.elems_[i], gens[s]);
        if (w.index_.count(p)) continue;
        if (w.elems_.size() >= size_cap)
          throw std::runtime_error("window size cap exceeded (" +
                                   std::to_string(size_cap) + ")");
        w.index_[p] = (int)w.elems_.size();
        w.elems_.push_back(std::move(p));
        w.parent_.push_back((int)i);
        w.genidx_.push_back((int)s);
      }
    }
    level_begin = level_end;
  }
  return w;
}

Window Window::from_elements(std::shared_ptr<const Group> g,
                             std::vector<Element> elems) {
  Window w;
  w.group_ = g;
  w.elems_ = std::move(elems);
  w.id_idx_ = -1;
  for (size_t i = 0; i < w.elems_.size(); ++i) {
    g->validate(w.elems_[i]);
    if (!w.index_.emplace(w.elems_[i], (int)i).second)
      throw std::invalid_argument("window has duplicate elements");
    if (g->is_identity(w.elems_[i])) w.id_idx_ = (int)i;
  }
  if (w.id_idx_ < 0)
    throw std::invalid_argument("window must contain the identity");
  return w;
}

int Window::index_of(const Element& e) const {
  auto it = index_.find(e);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> Window::word_of(int index) const {
  if (!has_words()) throw std::runtime_error("window has no BFS words");
  std::vector<int> word;
  int cur = index;
  while (parent_[cur] >= 0) {
    word.push_back(genidx_[cur]);
    cur = parent_[cur];
  }
  std::reverse(word.begin(), word.end());
  return word;
}

bool Window::same_window(const Window& o) const {
  return group_ && o.group_ && group_->same_as(*o.group_) &&
         elems_ == o.elems_;
}

ClosureReport check_products_up_to_length(const Window& W, int L) {
  ClosureReport rep;
  rep.requirement = "products-up-to-length-" + std::to_string(L);
  Window full = W.group()->ball(L);
  for (const Element& e : full.elements()) {
    if (!W.contains(e)) {
      rep.pass = false;
      rep.missing.push_back(e);
    }
  }
  return rep;
}

ClosureReport check_pair_products(const Window& W, std::span<const Element> E) {
  ClosureReport rep;
  rep.requirement = "E*E^-1 within window";
  const Group& g = *W.group();
  std::unordered_map<Element, bool, ElementHash> seen;
  for (const Element& a : E) {
    for (const Element& b : E) {
      Element p = g.multiply(a, g.inverse(b));
      if (!W.contains(p) && seen.emplace(p, true).second) {
        rep.pass = false;
        rep.missing.push_back(p);
      }
    }
  }
  return rep;
}

ClosureReport check_translate(const Window& target, const Element& g,
                              const Window& W) {
  ClosureReport rep;
  rep.requirement = "g*W within target window";
  const Group& gr = *W.group();
  for (const Element& a : W.elements()) {
    Element p = gr.multiply(g, a);
    if (!target.contains(p)) {
      rep.pass = false;
      rep.missing.push_back(p);
    }
  }
  return rep;
}

ClosureReport check_conjugates(const Window& W, const Element& g,
                               std::span<const Element> F) {
  ClosureReport rep;
  rep.requirement = "g*F*g^-1 within window";
  const Group& gr = *W.group();
  for (const Element& a : F) {
    Element p = gr.conjugate(g, a);
    if (!W.contains(p)) {
      rep.pass = false;
      rep.missing.push_back(p);
    }
  }
  return rep;
}

}  // namespace soficlab
