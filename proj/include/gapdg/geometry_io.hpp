// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "gapdg/geometry.hpp"

namespace gapdg {

/// Domain text format:
///   dim <d> degree <k>
///   per patch (left then right): d knot-vector lines, control point count,
///   one control point per line (lexicographic, direction 1 fastest)
///   gap line: dg <real> lambda <real> split <real> profile <name>
template <int D>
void write_domain(std::ostream& os, const MultiPatchDomain<D>& dom) {
  os << "dim " << D << " degree " << dom.left.basis().degree() << "\n";
  for (const PatchSide side : {PatchSide::left, PatchSide::right}) {
    const PatchMap<D>& p = dom.patch(side);
    for (int d = 0; d < D; ++d) {
      const auto& kts = p.basis().direction(d).knots();
      for (std::size_t i = 0; i < kts.size(); ++i)
        os << (i ? " " : "") << detail::fmt_double(kts[i]);
      os << "\n";
    }
    os << p.control_points().size() << "\n";
    for (const auto& c : p.control_points()) {
      for (int d = 0; d < D; ++d) os << (d ? " " : "") << detail::fmt_double(c[d]);
      os << "\n";
    }
  }
  os << "dg " << detail::fmt_double(dom.gap.d_g) << " lambda "
     << detail::fmt_double(dom.gap.lambda) << " split "
     << detail::fmt_double(dom.gap.split) << " profile " << profile_name(dom.gap.profile)
     << "\n";
}

template <int D>
void write_domain(const std::string& path, const MultiPatchDomain<D>& dom) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_domain: cannot open " + path);
  write_domain(os, dom);
}

/// Dimension recorded in a domain file (needed to pick the template arity).
inline int domain_file_dimension(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("domain_file_dimension: cannot open " + path);
  std::string tag;
  int dim = 0;
  is >> tag >> dim;
  if (tag != "dim" || (dim != 2 && dim != 3))
    throw std::runtime_error("domain file: bad header");
  return dim;
}

template <int D>
MultiPatchDomain<D> read_domain(std::istream& is) {
  std::string tag;
  int dim = 0, degree = 0;
  is >> tag >> dim;
  if (tag != "dim" || dim != D) throw std::runtime_error("domain file: dimension mismatch");
  is >> tag >> degree;
  if (tag != "degree" || degree < 1) throw std::runtime_error("domain file: bad degree");
  is.ignore();  // rest of header line

  auto read_patch = [&](PatchSide side) {
    std::array<KnotVector, D> kvs = uniform_directions<D>(KnotVector::clamped(degree));
    for (int d = 0; d < D; ++d) {
      std::string line;
      std::getline(is, line);
      std::istringstream ls(line);
      std::vector<double> kts;
      double v;
      while (ls >> v) kts.push_back(v);
      kvs[d] = KnotVector(degree, std::move(kts));
    }
    int count = 0;
    is >> count;
    is.ignore();
    std::vector<Vec<D>> cps(count);
    for (int i = 0; i < count; ++i) {
      for (int d = 0; d < D; ++d) is >> cps[i][d];
      is.ignore();
    }
    return PatchMap<D>(TensorBasis<D>(std::move(kvs)), std::move(cps), side);
  };

  PatchMap<D> left = read_patch(PatchSide::left);
  PatchMap<D> right = read_patch(PatchSide::right);

  GapInterface<D> gap;
  std::string name;
  is >> tag >> gap.d_g;
  if (tag != "dg") throw std::runtime_error("domain file: missing gap block");
  is >> tag >> gap.lambda >> tag >> gap.split >> tag >> name;
  gap.profile = profile_from_name(name);

  MultiPatchDomain<D> dom{std::move(left), std::move(right), gap, {}};
  dom.boundary = default_boundary_faces<D>();
  return dom;
}

template <int D>
MultiPatchDomain<D> read_domain(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_domain: cannot open " + path);
  return read_domain<D>(is);
}

}  // namespace gapdg
