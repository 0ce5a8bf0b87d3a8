#include "realrad/kernelbasis.hpp"
#include "realrad/pipeline.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace realrad;
using namespace realrad::testing;

namespace {

Exponent E(std::initializer_list<int> v) { return Exponent(std::vector<int>(v)); }

struct Solved {
  ProblemSpec spec;
  RelaxationProblem P;
  SolveResult S;
};

Solved solve(const std::string& file, int t, double tau) {
  Solved s{make_spec(load_system(file)), {}, {}};
  s.spec.options.tau = tau;
  s.P = build_relaxation(s.spec, t);
  s.S = solve_generic(s.P);
  return s;
}

}  // namespace

TEST(ReducedKernelBasis, FullRankGivesEmptyBasis) {
  MonomialIndex idx(2, 2);
  for (auto method : {KernelMethod::Staircase, KernelMethod::Rref}) {
    ReducedBasis b = reduced_kernel_basis(Matrix::Identity(6, 6), idx, 1e-8, method);
    EXPECT_EQ(b.size(), 0u);
    EXPECT_EQ(b.corank, 0);
  }
}

// I = <x>, t = 3: the generic point has M_2 = diag(1, 0, 0), kernel {x, x^2}.
TEST(ReducedKernelBasis, LineWalkthrough) {
  ProblemSpec spec = make_spec(parse_system("vars: x\ngen: x\n"));
  RelaxationProblem P = build_relaxation(spec, 3);
  SolveResult S = solve_generic(P);
  Matrix M2 = assemble_moment(S.y, 2);
  for (auto method : {KernelMethod::Staircase, KernelMethod::Rref}) {
    ReducedBasis b = reduced_kernel_basis(M2, *P.index, 1e-8, method);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b.elements[0], RPoly::monomial(E({2}), 1.0));
    EXPECT_EQ(b.elements[1], RPoly::monomial(E({1}), 1.0));
  }
}

TEST(ReducedKernelBasis, StetterOrderFour) {
  Solved s = solve("example1.sys", 4, 1e-5);
  const MonomialIndex& big = *s.P.index;
  Matrix M = assemble_moment(s.S.y, 4);
  const int m2 = big.count_upto(2), m3 = big.count_upto(3);
  ReducedBasis b2 = reduced_kernel_basis(M.topLeftCorner(m2, m2), big, 1e-5);
  ASSERT_EQ(b2.size(), 3u);
  std::vector<int> classes;
  for (const auto& g : b2.elements) {
    EXPECT_EQ(g.degree(), 2);
    EXPECT_EQ(g.lead_coeff(), 1.0);
    classes.push_back(class_of_poly(g));
  }
  std::sort(classes.begin(), classes.end());
  EXPECT_EQ(classes, (std::vector<int>{1, 2, 3}));

  ReducedBasis b3 = reduced_kernel_basis(M.topLeftCorner(m3, m3), big, 1e-5);
  EXPECT_EQ(b3.size(), 9u);
  EXPECT_EQ(corank_profile(b3), (std::map<int, int>{{2, 3}, {3, 6}}));
  ReducedBasis tr = truncate_basis(b3, 2);
  EXPECT_EQ(tr.leading_monomials(), b2.leading_monomials());
  EXPECT_TRUE(same_basis(tr, b2, 1e-6));
}

TEST(ReducedKernelBasis, DeltaIrregularProfile) {
  Solved s = solve("example4.sys", 4, 1e-7);
  const MonomialIndex& big = *s.P.index;
  const int m3 = big.count_upto(3);
  ReducedBasis b3 = reduced_kernel_basis(assemble_moment(s.S.y, 4).topLeftCorner(m3, m3), big, 1e-7);
  auto prof = corank_profile(b3);
  EXPECT_EQ(prof[3], 7);
  EXPECT_EQ(prof[2], 3);
}

TEST(ReducedKernelBasis, LeadingMonomialsDistinctAndDescending) {
  Solved s = solve("example3.sys", 4, 1e-8);
  ReducedBasis b = reduced_kernel_basis(assemble_moment(s.S.y, 3), *s.P.index, 1e-8);
  ASSERT_GT(b.size(), 1u);
  for (std::size_t k = 0; k + 1 < b.size(); ++k)
    EXPECT_EQ(grevlex_compare(b.elements[k].lead_exponent(), b.elements[k + 1].lead_exponent()), Cmp::Greater);
  EXPECT_EQ(static_cast<int>(b.size()), b.corank);
}

TEST(TruncateBasis, Edges) {
  ReducedBasis b;
  b.order = 3;
  b.elements = {RPoly::monomial(E({3}), 1.0), RPoly::monomial(E({2}), 1.0)};
  EXPECT_EQ(truncate_basis(b, 3).elements, b.elements);
  EXPECT_TRUE(truncate_basis(b, 1).elements.empty());
  EXPECT_TRUE(corank_profile(ReducedBasis{}).empty());
}
