#include "soficlab/io.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "soficlab/config.hpp"

namespace soficlab {

namespace {

template <class T>
void put(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  auto u = (unsigned long long)(std::make_unsigned_t<T>)v;
  for (size_t i = 0; i < sizeof(T); ++i) buf[i] = (unsigned char)(u >> (8 * i));
  os.write((const char*)buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read((char*)buf, sizeof(T));
  if (!is) throw std::runtime_error("truncated binary dump");
  unsigned long long u = 0;
  for (size_t i = 0; i < sizeof(T); ++i)
    u |= (unsigned long long)buf[i] << (8 * i);
  return (T)(std::make_unsigned_t<T>)u;
}

void put_string(std::ostream& os, const std::string& s) {
  put<uint64_t>(os, s.size());
  os.write(s.data(), (std::streamsize)s.size());
}

std::string get_string(std::istream& is) {
  uint64_t n = get<uint64_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), (std::streamsize)n);
  if (!is) throw std::runtime_error("truncated binary dump");
  return s;
}

void put_element(std::ostream& os, const Element& e) {
  put<uint32_t>(os, (uint32_t)e.v.size());
  for (long long x : e.v) put<int64_t>(os, x);
}

Element get_element(std::istream& is) {
  uint32_t n = get<uint32_t>(is);
  Element e;
  e.v.reserve(n);
  for (uint32_t i = 0; i < n; ++i) e.v.push_back(get<int64_t>(is));
  return e;
}

void put_perm(std::ostream& os, const Permutation& p) {
  put<uint32_t>(os, p.degree());
  for (uint32_t j = 0; j < p.degree(); ++j) put<uint32_t>(os, p(j));
}

Permutation get_perm(std::istream& is) {
  uint32_t d = get<uint32_t>(is);
  std::vector<uint32_t> img(d);
  for (uint32_t j = 0; j < d; ++j) img[j] = get<uint32_t>(is);
  return Permutation(std::move(img));
}

void check_magic(std::istream& is, const char* magic) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::string(buf, 4) != magic)
    throw std::runtime_error("bad binary dump magic");
}

}  // namespace

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ",";
    os_ << csv_escape(fields[i]);
  }
  os_ << "\n";
}

void dump_approx_hom(const ApproxHom& sigma, std::ostream& os) {
  os.write("SAH1", 4);
  put_string(os, group_spec_to_json(sigma.group()->spec()).dump());
  put<uint32_t>(os, sigma.degree());
  put<uint64_t>(os, sigma.window().size());
  for (const Element& e : sigma.window().elements()) put_element(os, e);
  for (size_t i = 0; i < sigma.window().size(); ++i)
    put_perm(os, sigma.stored_image(i));
}

ApproxHom load_approx_hom(std::istream& is, int eval_length_cap) {
  check_magic(is, "SAH1");
  GroupSpec spec = group_spec_from_json(json::parse(get_string(is)));
  auto gr = Group::from_spec(spec);
  uint32_t degree = get<uint32_t>(is);
  uint64_t count = get<uint64_t>(is);
  std::vector<Element> elems;
  elems.reserve(count);
  for (uint64_t i = 0; i < count; ++i) elems.push_back(get_element(is));
  std::vector<Permutation> images;
  images.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    images.push_back(get_perm(is));
    if (images.back().degree() != degree)
      throw std::runtime_error("dump image degree mismatch");
  }
  Window w = Window::from_elements(gr, std::move(elems));
  return ApproxHom(gr, std::move(w), std::move(images), eval_length_cap);
}

void dump_approx_hom_file(const ApproxHom& sigma, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  dump_approx_hom(sigma, os);
}

ApproxHom load_approx_hom_file(const std::string& path, int eval_length_cap) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load_approx_hom(is, eval_length_cap);
}

void dump_relation_data(const SoficApproxData& data, std::ostream& os) {
  os.write("SRD1", 4);
  put_string(os, group_spec_to_json(data.group->spec()).dump());
  put<uint32_t>(os, data.degree);
  put<uint64_t>(os, data.element_window.size());
  for (const Element& e : data.element_window.elements()) put_element(os, e);
  for (const Permutation& p : data.perms) put_perm(os, p);
  put<uint64_t>(os, data.sets.size());
  for (const auto& [set, members] : data.sets) {
    put_string(os, set.name);
    put<uint8_t>(os, set.infeasible ? 1 : 0);
    put<uint32_t>(os, (uint32_t)set.bit_constraints.size());
    for (const auto& [g, v] : set.bit_constraints) {
      put_element(os, g);
      put<uint8_t>(os, v ? 1 : 0);
    }
    put<uint32_t>(os, (uint32_t)set.label_constraints.size());
    for (const auto& [g, u] : set.label_constraints) {
      put_element(os, g);
      put<int32_t>(os, u.bins);
      put<uint32_t>(os, (uint32_t)u.members.size());
      for (int m : u.members) put<int32_t>(os, m);
    }
    put<uint64_t>(os, members.size());
    for (uint32_t j : members) put<uint32_t>(os, j);
  }
}

SoficApproxData load_relation_data(std::istream& is) {
  check_magic(is, "SRD1");
  SoficApproxData data;
  data.group = Group::from_spec(group_spec_from_json(json::parse(get_string(is))));
  data.degree = get<uint32_t>(is);
  uint64_t wcount = get<uint64_t>(is);
  std::vector<Element> elems;
  for (uint64_t i = 0; i < wcount; ++i) elems.push_back(get_element(is));
  data.element_window = Window::from_elements(data.group, std::move(elems));
  for (uint64_t i = 0; i < wcount; ++i) data.perms.push_back(get_perm(is));
  uint64_t scount = get<uint64_t>(is);
  for (uint64_t i = 0; i < scount; ++i) {
    CylinderSet set;
    set.name = get_string(is);
    set.infeasible = get<uint8_t>(is) != 0;
    uint32_t nb = get<uint32_t>(is);
    for (uint32_t t = 0; t < nb; ++t) {
      Element g = get_element(is);
      bool v = get<uint8_t>(is) != 0;
      set.bit_constraints.emplace_back(std::move(g), v);
    }
    uint32_t nl = get<uint32_t>(is);
    for (uint32_t t = 0; t < nl; ++t) {
      Element g = get_element(is);
      CylinderSet::BinUnion u;
      u.bins = get<int32_t>(is);
      uint32_t nm = get<uint32_t>(is);
      for (uint32_t m = 0; m < nm; ++m) u.members.push_back(get<int32_t>(is));
      set.label_constraints.emplace_back(std::move(g), std::move(u));
    }
    uint64_t nmem = get<uint64_t>(is);
    std::vector<uint32_t> members;
    members.reserve(nmem);
    for (uint64_t m = 0; m < nmem; ++m) members.push_back(get<uint32_t>(is));
    data.sets.emplace_back(std::move(set), std::move(members));
  }
  data.index_sets();
  return data;
}

void dump_relation_data_file(const SoficApproxData& data,
                             const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  dump_relation_data(data, os);
}

SoficApproxData load_relation_data_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load_relation_data(is);
}

}  // namespace soficlab
