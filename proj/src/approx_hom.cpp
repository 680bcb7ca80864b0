#include "soficlab/approx_hom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "soficlab/rng.hpp"

namespace soficlab {

namespace {

long long mod_floor(long long a, long long m) {
  long long r = a % m;
  return r < 0 ? r + m : r;
}

// Column-style Hermite normal form of a nonsingular integer matrix
// (columns generate the lattice). Returns an upper-triangular matrix with
// positive diagonal whose columns generate the same lattice.
std::vector<std::vector<long long>> hermite_normal_form(
    std::vector<std::vector<long long>> m) {
  size_t k = m.size();
  for (auto& row : m)
    if (row.size() != k) throw std::invalid_argument("basis must be square");
  // Work on columns: eliminate below the diagonal by gcd steps on columns.
  for (size_t i = k; i-- > 0;) {
    // Clear row i entries in columns 0..i-1 against column i, bottom-up.
    for (size_t j = 0; j < i; ++j) {
      while (m[i][j] != 0) {
        if (m[i][i] == 0) {
          for (size_t r = 0; r < k; ++r) std::swap(m[r][i], m[r][j]);
          continue;
        }
        long long q = m[i][j] / m[i][i];
        for (size_t r = 0; r < k; ++r) m[r][j] -= q * m[r][i];
        if (m[i][j] != 0)
          for (size_t r = 0; r < k; ++r) std::swap(m[r][i], m[r][j]);
      }
    }
    if (m[i][i] == 0)
      throw std::invalid_argument("basis is singular (infinite index)");
    if (m[i][i] < 0)
      for (size_t r = 0; r < k; ++r) m[r][i] = -m[r][i];
  }
  // Reduce entries right of the diagonal.
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      long long q = m[i][j] / m[i][i];
      if (m[i][j] - q * m[i][i] < 0) q -= 1;
      if (q != 0)
        for (size_t r = 0; r < k; ++r) m[r][j] -= q * m[r][i];
    }
  }
  return m;
}

struct CosetTable {
  std::vector<std::vector<long long>> hnf;
  std::vector<long long> diag;

  explicit CosetTable(const std::vector<std::vector<long long>>& basis)
      : hnf(hermite_normal_form(basis)) {
    for (size_t i = 0; i < hnf.size(); ++i) diag.push_back(hnf[i][i]);
  }

  std::vector<long long> reduce(std::vector<long long> x) const {
    for (size_t i = x.size(); i-- > 0;) {
      long long q = x[i] / diag[i];
      if (x[i] - q * diag[i] < 0) q -= 1;
      if (q != 0)
        for (size_t r = 0; r <= i; ++r) x[r] -= q * hnf[r][i];
    }
    return x;
  }

  long long index() const {
    long long d = 1;
    for (long long v : diag) d *= v;
    return d;
  }

  long long encode(const std::vector<long long>& reduced) const {
    long long idx = 0;
    for (size_t i = reduced.size(); i-- > 0;) idx = idx * diag[i] + reduced[i];
    return idx;
  }

  std::vector<long long> decode(long long idx) const {
    std::vector<long long> x(diag.size());
    for (size_t i = 0; i < diag.size(); ++i) {
      x[i] = idx % diag[i];
      idx /= diag[i];
    }
    return x;
  }
};

Permutation power(const Permutation& p, long long e) {
  Permutation base = e >= 0 ? p : p.inverse();
  long long n = e >= 0 ? e : -e;
  Permutation acc = Permutation::identity(p.degree());
  while (n > 0) {
    if (n & 1) acc = compose(acc, base);
    base = compose(base, base);
    n >>= 1;
  }
  return acc;
}

std::vector<Permutation> generator_image_table(const Group& group,
                                               const ActionSpec& a) {
  bool free_like = group.spec().kind == GroupKind::Free ||
                   (group.spec().kind == GroupKind::Lattice && group.spec().rank == 1);
  if (!free_like)
    throw std::invalid_argument(
        "generator_images actions require a free group or Z");
  int rank = group.spec().kind == GroupKind::Free ? group.spec().rank : 1;
  std::vector<Permutation> imgs;
  if (!a.images.empty()) {
    if ((int)a.images.size() != rank)
      throw std::invalid_argument("expected one image per free generator");
    for (const auto& img : a.images) imgs.emplace_back(img);
    for (const auto& p : imgs)
      if (p.degree() != imgs[0].degree())
        throw std::invalid_argument("generator images have mixed degrees");
  } else {
    if (!a.seed || a.degree <= 0)
      throw std::invalid_argument("seeded generator images need degree and seed");
    for (int i = 0; i < rank; ++i) {
      std::vector<uint32_t> img((size_t)a.degree);
      std::iota(img.begin(), img.end(), 0u);
      CounterRng rng = CounterRng::stream(*a.seed, (uint64_t)i);
      rng.shuffle(img.data(), img.size());
      imgs.emplace_back(std::move(img));
    }
  }
  return imgs;
}

}  // namespace

ActionSpec ActionSpec::cyclic(long long modulus, std::vector<long long> offsets) {
  ActionSpec a;
  a.kind = Kind::Cyclic;
  a.modulus = modulus;
  a.offsets = std::move(offsets);
  return a;
}

ActionSpec ActionSpec::torus(long long n) {
  ActionSpec a;
  a.kind = Kind::Torus;
  a.n = n;
  return a;
}

ActionSpec ActionSpec::regular() {
  ActionSpec a;
  a.kind = Kind::Regular;
  return a;
}

ActionSpec ActionSpec::lattice_coset(std::vector<std::vector<long long>> basis) {
  ActionSpec a;
  a.kind = Kind::LatticeCoset;
  a.basis = std::move(basis);
  return a;
}

ActionSpec ActionSpec::heis_mod(long long n) {
  ActionSpec a;
  a.kind = Kind::HeisMod;
  a.n = n;
  return a;
}

ActionSpec ActionSpec::seeded_images(long long degree, uint64_t seed) {
  ActionSpec a;
  a.kind = Kind::GeneratorImages;
  a.degree = degree;
  a.seed = seed;
  return a;
}

ActionSpec ActionSpec::explicit_images(std::vector<std::vector<uint32_t>> images) {
  ActionSpec a;
  a.kind = Kind::GeneratorImages;
  a.images = std::move(images);
  return a;
}

ActionSpec ActionSpec::trivial(long long degree) {
  ActionSpec a;
  a.kind = Kind::Trivial;
  a.degree = degree;
  return a;
}

uint32_t action_degree(const Group& group, const ActionSpec& a) {
  auto as_u32 = [](long long d) {
    if (d < 1 || d > (long long)UINT32_MAX)
      throw std::invalid_argument("action degree out of range");
    return (uint32_t)d;
  };
  switch (a.kind) {
    case ActionSpec::Kind::Cyclic: {
      if (group.spec().kind != GroupKind::Lattice ||
          (int)a.offsets.size() != group.spec().rank)
        throw std::invalid_argument("cyclic action needs Z^k with one offset per rank");
      return as_u32(a.modulus);
    }
    case ActionSpec::Kind::Torus: {
      if (group.spec().kind != GroupKind::Lattice)
        throw std::invalid_argument("torus action needs Z^k");
      long long d = 1;
      for (int i = 0; i < group.spec().rank; ++i) {
        d *= a.n;
        if (d > (long long)UINT32_MAX)
          throw std::invalid_argument("torus degree out of range");
      }
      return as_u32(d);
    }
    case ActionSpec::Kind::Regular: {
      if (group.spec().kind != GroupKind::FiniteAbelian)
        throw std::invalid_argument("regular action needs a finite group");
      long long d = 1;
      for (long long m : group.spec().moduli) d *= m;
      return as_u32(d);
    }
    case ActionSpec::Kind::LatticeCoset: {
      if (group.spec().kind != GroupKind::Lattice ||
          (int)a.basis.size() != group.spec().rank)
        throw std::invalid_argument("lattice_coset needs Z^k and a k x k basis");
      return as_u32(CosetTable(a.basis).index());
    }
    case ActionSpec::Kind::HeisMod: {
      if (group.spec().kind != GroupKind::Heisenberg)
        throw std::invalid_argument("heis_mod action needs H3(Z)");
      return as_u32(a.n * a.n * a.n);
    }
    case ActionSpec::Kind::GeneratorImages: {
      auto imgs = generator_image_table(group, a);
      uint32_t d = imgs[0].degree();
      if (a.degree > 0 && (long long)d != a.degree)
        throw std::invalid_argument("explicit images disagree with declared degree");
      return d;
    }
    case ActionSpec::Kind::Trivial:
      return as_u32(a.degree);
  }
  throw std::logic_error("unknown action kind");
}

Permutation action_image(const Group& group, const ActionSpec& a,
                         const Element& g) {
  group.validate(g);
  uint32_t d = action_degree(group, a);
  switch (a.kind) {
    case ActionSpec::Kind::Cyclic: {
      long long shift = 0;
      for (size_t i = 0; i < a.offsets.size(); ++i)
        shift = mod_floor(shift + g.v[i] * mod_floor(a.offsets[i], a.modulus),
                          a.modulus);
      std::vector<uint32_t> img(d);
      for (uint32_t j = 0; j < d; ++j) img[j] = (uint32_t)((j + shift) % d);
      return Permutation(std::move(img));
    }
    case ActionSpec::Kind::Torus: {
      int k = group.spec().rank;
      long long n = a.n;
      std::vector<uint32_t> img(d);
      std::vector<long long> digits(k);
      for (uint32_t j = 0; j < d; ++j) {
        long long rem = j;
        for (int i = 0; i < k; ++i) {
          digits[i] = rem % n;
          rem /= n;
        }
        long long enc = 0;
        for (int i = k - 1; i >= 0; --i)
          enc = enc * n + mod_floor(digits[i] + g.v[i], n);
        img[j] = (uint32_t)enc;
      }
      return Permutation(std::move(img));
    }
    case ActionSpec::Kind::Regular: {
      const auto& m = group.spec().moduli;
      std::vector<uint32_t> img(d);
      std::vector<long long> digits(m.size());
      for (uint32_t j = 0; j < d; ++j) {
        long long rem = j;
        for (size_t i = 0; i < m.size(); ++i) {
          digits[i] = rem % m[i];
          rem /= m[i];
        }
        long long enc = 0;
        for (size_t i = m.size(); i-- > 0;)
          enc = enc * m[i] + mod_floor(digits[i] + g.v[i], m[i]);
        img[j] = (uint32_t)enc;
      }
      return Permutation(std::move(img));
    }
    case ActionSpec::Kind::LatticeCoset: {
      CosetTable table(a.basis);
      std::vector<uint32_t> img(d);
      for (uint32_t j = 0; j < d; ++j) {
        std::vector<long long> x = table.decode(j);
        for (size_t i = 0; i < x.size(); ++i) x[i] += g.v[i];
        img[j] = (uint32_t)table.encode(table.reduce(std::move(x)));
      }
      return Permutation(std::move(img));
    }
    case ActionSpec::Kind::HeisMod: {
      long long n = a.n;
      std::vector<uint32_t> img(d);
      for (uint32_t j = 0; j < d; ++j) {
        long long ha = j % n, hb = (j / n) % n, hc = j / (n * n);
        long long ra = mod_floor(g.v[0] + ha, n);
        long long rb = mod_floor(g.v[1] + hb, n);
        long long rc = mod_floor(g.v[2] + hc + g.v[0] * hb, n);
        img[j] = (uint32_t)(ra + n * rb + n * n * rc);
      }
      return Permutation(std::move(img));
    }
    case ActionSpec::Kind::GeneratorImages: {
      auto imgs = generator_image_table(group, a);
      if (group.spec().kind == GroupKind::Lattice)
        return power(imgs[0], g.v[0]);
      Permutation acc = Permutation::identity(d);
      for (long long letter : g.v) {
        const Permutation& base = imgs[(size_t)std::llabs(letter) - 1];
        acc = compose(acc, letter > 0 ? base : base.inverse());
      }
      return acc;
    }
    case ActionSpec::Kind::Trivial:
      return Permutation::identity(d);
  }
  throw std::logic_error("unknown action kind");
}

ApproxHom::ApproxHom(std::shared_ptr<const Group> group, Window window,
                     std::vector<Permutation> images, int eval_length_cap)
    : group_(std::move(group)),
      window_(std::move(window)),
      images_(std::move(images)),
      eval_cap_(eval_length_cap) {
  if (window_.size() != images_.size())
    throw std::invalid_argument("one image per window element required");
  if (images_.empty()) throw std::invalid_argument("empty window");
  degree_ = images_[0].degree();
  for (const auto& p : images_)
    if (p.degree() != degree_)
      throw std::invalid_argument("stored images have mixed degrees");
  for (const Element& s : group_->generators())
    generator_window_index_.push_back(window_.index_of(s));
}

ApproxHom ApproxHom::from_action(std::shared_ptr<const Group> group,
                                 const ActionSpec& action, const Window& window,
                                 int eval_length_cap) {
  std::vector<Permutation> images;
  images.reserve(window.size());
  for (const Element& g : window.elements())
    images.push_back(action_image(*group, action, g));
  return ApproxHom(group, window, std::move(images), eval_length_cap);
}

Permutation ApproxHom::evaluate(const Element& g) const {
  int idx = window_.index_of(g);
  if (idx >= 0) return images_[idx];
  std::vector<int> word = group_->geodesic_word(g, eval_cap_);
  Permutation acc = Permutation::identity(degree_);
  for (int s : word) {
    int gi = generator_window_index_[s];
    if (gi < 0)
      throw std::runtime_error("generator " +
                               group_->to_string(group_->generators()[s]) +
                               " missing from the stored window");
    acc = compose(acc, images_[gi]);
  }
  return acc;
}

std::vector<Permutation> ApproxHom::evaluate_all(
    std::span<const Element> elems) const {
  std::vector<Permutation> out;
  out.reserve(elems.size());
  for (const Element& g : elems) out.push_back(evaluate(g));
  return out;
}

DefectReport defect(const ApproxHom& sigma,
                    std::span<const std::pair<Element, Element>> pairs) {
  const Group& gr = *sigma.group();
  DefectReport rep;
  rep.identity_defect =
      hamming(sigma.evaluate(gr.identity()),
              Permutation::identity(sigma.degree()));
  Rational sum(0, 1);
  for (const auto& [g, h] : pairs) {
    Permutation lhs = sigma.evaluate(gr.multiply(g, h));
    Permutation rhs = compose(sigma.evaluate(g), sigma.evaluate(h));
    Rational v = hamming(lhs, rhs);
    if (rep.entries.empty() || rep.max < v) rep.max = v;
    sum += v;
    rep.entries.push_back({g, h, v});
  }
  if (!rep.entries.empty())
    rep.mean = sum / Rational::integer((long long)rep.entries.size());
  return rep;
}

SubgroupConsistencyReport subgroup_consistency_defects(const ApproxHom& sigma,
                                                       const Window& W) {
  const Group& gr = *sigma.group();
  uint32_t d = sigma.degree();
  std::vector<Permutation> imgs = sigma.evaluate_all(W.elements());
  SubgroupConsistencyReport rep;

  Permutation id_img = sigma.evaluate(gr.identity());
  long long idbad = 0;
  for (uint32_t j = 0; j < d; ++j)
    if (id_img(j) != j) ++idbad;
  rep.identity_mass = Rational(idbad, d);

  for (size_t i1 = 0; i1 < W.size(); ++i1) {
    for (size_t i2 = 0; i2 < W.size(); ++i2) {
      Element prod = gr.multiply(W[i1], W[i2]);
      int ip = W.index_of(prod);
      if (ip < 0) continue;
      long long bad = 0;
      const auto& pg = imgs[i1];
      const auto& ph = imgs[i2];
      const auto& pp = imgs[ip];
      for (uint32_t j = 0; j < d; ++j)
        if (pg(j) == j && ph(j) == j && pp(j) != j) ++bad;
      rep.product_violations.push_back({W[i1], W[i2], Rational(bad, d)});
    }
  }

  for (size_t i = 0; i < W.size(); ++i) {
    Element inv = gr.inverse(W[i]);
    int ii = W.index_of(inv);
    const Permutation pinv = ii >= 0 ? imgs[ii] : sigma.evaluate(inv);
    long long bad = 0;
    for (uint32_t j = 0; j < d; ++j)
      if ((imgs[i](j) == j) != (pinv(j) == j)) ++bad;
    rep.inverse_violations.push_back({W[i], Rational(bad, d)});
  }
  return rep;
}

ApproxHom perturb(const ApproxHom& sigma, double rate, uint64_t seed) {
  if (rate < 0.0 || rate > 1.0)
    throw std::invalid_argument("perturbation rate must lie in [0,1]");
  uint32_t d = sigma.degree();
  long long subset_size = (long long)std::ceil(rate * (double)d - 1e-9);
  subset_size = std::clamp<long long>(subset_size, 0, d);

  std::vector<Permutation> images;
  images.reserve(sigma.window().size());
  std::vector<uint32_t> points(d);
  for (size_t wi = 0; wi < sigma.window().size(); ++wi) {
    const Permutation& old = sigma.stored_image(wi);
    if (subset_size < 2) {
      images.push_back(old);
      continue;
    }
    CounterRng rng = CounterRng::stream(seed, (uint64_t)wi);
    std::iota(points.begin(), points.end(), 0u);
    // Uniform random subset: first entries of a Fisher-Yates pass.
    for (long long t = 0; t < subset_size; ++t) {
      size_t j = (size_t)t + (size_t)rng.below((uint64_t)(d - t));
      std::swap(points[t], points[j]);
    }
    std::vector<uint32_t> subset(points.begin(), points.begin() + subset_size);
    std::vector<uint32_t> target = subset;
    bool deranged = false;
    for (int attempt = 0; attempt < 64 && !deranged; ++attempt) {
      rng.shuffle(target.data(), target.size());
      deranged = true;
      for (size_t t = 0; t < subset.size(); ++t)
        if (target[t] == subset[t]) {
          deranged = false;
          break;
        }
    }
    if (!deranged)  // fall back to a cyclic shift, which never fixes a point
      std::rotate(target.begin(), target.begin() + 1, target.end());

    std::vector<uint32_t> noise(d);
    std::iota(noise.begin(), noise.end(), 0u);
    for (size_t t = 0; t < subset.size(); ++t) noise[subset[t]] = target[t];
    std::vector<uint32_t> img(d);
    for (uint32_t j = 0; j < d; ++j) img[j] = noise[old(j)];
    images.emplace_back(std::move(img));
  }
  return ApproxHom(sigma.group(), sigma.window(), std::move(images),
                   sigma.eval_length_cap());
}

ApproxHom block_sum(const ApproxHom& sigma, uint32_t q, uint32_t degree_cap) {
  if (q < 1) throw std::invalid_argument("block count must be >= 1");
  uint64_t nd = (uint64_t)sigma.degree() * q;
  if (nd > degree_cap)
    throw std::invalid_argument("block_sum exceeds the degree cap");
  uint32_t d = sigma.degree();
  std::vector<Permutation> images;
  images.reserve(sigma.window().size());
  for (size_t wi = 0; wi < sigma.window().size(); ++wi) {
    const Permutation& old = sigma.stored_image(wi);
    std::vector<uint32_t> img((size_t)nd);
    for (uint32_t r = 0; r < q; ++r)
      for (uint32_t j = 0; j < d; ++j) img[(size_t)r * d + j] = old(j) + r * d;
    images.emplace_back(std::move(img));
  }
  return ApproxHom(sigma.group(), sigma.window(), std::move(images),
                   sigma.eval_length_cap());
}

ApproxHom pad_trivial(const ApproxHom& sigma, uint32_t r) {
  uint32_t d = sigma.degree();
  std::vector<Permutation> images;
  images.reserve(sigma.window().size());
  for (size_t wi = 0; wi < sigma.window().size(); ++wi) {
    const Permutation& old = sigma.stored_image(wi);
    std::vector<uint32_t> img((size_t)d + r);
    for (uint32_t j = 0; j < d; ++j) img[j] = old(j);
    for (uint32_t j = d; j < d + r; ++j) img[j] = j;
    images.emplace_back(std::move(img));
  }
  return ApproxHom(sigma.group(), sigma.window(), std::move(images),
                   sigma.eval_length_cap());
}

ApproxHom redimension(const ApproxHom& sigma, uint32_t target_degree,
                      uint32_t degree_cap) {
  if (target_degree < sigma.degree())
    throw std::invalid_argument("redimension target below current degree");
  uint32_t q = target_degree / sigma.degree();
  uint32_t r = target_degree % sigma.degree();
  ApproxHom out = block_sum(sigma, q, degree_cap);
  if (r > 0) out = pad_trivial(out, r);
  return out;
}

}  // namespace soficlab
