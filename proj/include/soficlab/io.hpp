#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "soficlab/approx_hom.hpp"
#include "soficlab/relation.hpp"

namespace soficlab {

// Minimal CSV writer; quotes fields containing separators.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

std::string csv_escape(const std::string& field);

// Binary dumps (little-endian, fixed width). ApproxHom: degree, window
// element list, image sequences.
void dump_approx_hom(const ApproxHom& sigma, std::ostream& os);
ApproxHom load_approx_hom(std::istream& is, int eval_length_cap = 16);
void dump_approx_hom_file(const ApproxHom& sigma, const std::string& path);
ApproxHom load_approx_hom_file(const std::string& path,
                               int eval_length_cap = 16);

void dump_relation_data(const SoficApproxData& data, std::ostream& os);
SoficApproxData load_relation_data(std::istream& is);
void dump_relation_data_file(const SoficApproxData& data,
                             const std::string& path);
SoficApproxData load_relation_data_file(const std::string& path);

}  // namespace soficlab
