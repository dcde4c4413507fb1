#include <istream>
#include <ostream>
#include <sstream>

#include "ruleseeker/errors.hpp"
#include "ruleseeker/solver.hpp"

namespace ruleseeker {

void writeInstanceDump(std::ostream& out, const SolveInstance& inst) {
  out << inst.dim << ' ' << inst.budget << ' ' << toString(inst.variant) << '\n';
  for (const auto& e : inst.examples) {
    out << e.weight << ' ' << e.v << ' ' << (inst.dim == 0 ? std::string("-") : e.u.toString()) << '\n';
  }
}

SolveInstance readInstanceDump(std::istream& in) {
  SolveInstance inst;
  std::string header;
  if (!std::getline(in, header)) throw ContractViolation("empty instance dump");
  std::istringstream hs(header);
  std::string variant;
  if (!(hs >> inst.dim >> inst.budget >> variant)) throw ContractViolation("bad instance dump header: " + header);
  inst.variant = parseVariant(variant);
  std::string line;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::istringstream ls(line);
    WeightedExample e;
    std::string bits;
    if (!(ls >> e.weight >> e.v >> bits) || e.weight == 0) {
      throw ContractViolation("bad instance dump line " + std::to_string(lineNo));
    }
    e.u = inst.dim == 0 && bits == "-" ? Instance(0) : Instance::fromString(bits);
    inst.examples.push_back(std::move(e));
  }
  inst.validate();
  return inst;
}

// Variables: x1..xd select features, then one fires-indicator per example,
// then (literal cardinality only) a never-fires switch.
void writeOpbModel(std::ostream& out, const SolveInstance& inst) {
  inst.validate();
  const std::size_t d = inst.dim;
  const std::size_t n = inst.examples.size();
  const bool literal = inst.cardinality == Cardinality::kLiteral;
  const bool sat = inst.variant == Variant::kSat;
  auto fireVar = [&](std::size_t i) { return "x" + std::to_string(d + 1 + i); };
  const std::string neverVar = "x" + std::to_string(d + n + 1);

  std::ostringstream body;
  std::size_t constraints = 0;
  for (std::size_t j = 0; j < d; ++j) body << "-1 x" << j + 1 << ' ';
  body << ">= -" << inst.budget << " ;\n";
  ++constraints;
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = inst.examples[i];
    body << "+1 " << fireVar(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (!e.u[j]) body << " +1 x" << j + 1;
    }
    if (literal) body << " +1 " << neverVar;
    body << " >= 1 ;\n";
    ++constraints;
    for (std::size_t j = 0; j < d; ++j) {
      if (e.u[j]) continue;
      body << "-1 " << fireVar(i) << " -1 x" << j + 1 << " >= -1 ;\n";
      ++constraints;
    }
    if (literal) {
      body << "-1 " << fireVar(i) << " -1 " << neverVar << " >= -1 ;\n";
      ++constraints;
    }
    if (e.v == 1 && !sat) offset += e.weight;
  }

  const std::size_t vars = d + n + (literal ? 1 : 0);
  out << "* #variable= " << vars << " #constraint= " << constraints << '\n';
  out << "* ruleseeker monomial model: variant " << toString(inst.variant) << ", cardinality "
      << toString(inst.cardinality) << ", k = " << inst.budget << '\n';
  out << "* objective constant offset " << offset << '\n';
  out << "min:";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = inst.examples[i];
    if (e.v == 0) {
      out << " +" << e.weight << ' ' << fireVar(i);
    } else if (!sat) {
      out << " -" << e.weight << ' ' << fireVar(i);
    }
  }
  out << " ;\n" << body.str();
}

}  // namespace ruleseeker
