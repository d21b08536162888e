#include "kernlyap/io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "kernlyap/errors.hpp"
#include "kernlyap/testbed.hpp"

namespace kernlyap::io {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kernlyap_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST_F(IoTest, DoublesRoundTripThroughText) {
  std::mt19937_64 rng(1);
  std::vector<double> values = {0.1, 1.0 / 3.0, -2.5e-308, 5e-324, 1.7976931348623157e308, -0.0,
                                123456789.123456789};
  std::uniform_int_distribution<std::uint64_t> bits;
  while (values.size() < 2000) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (std::isfinite(v)) values.push_back(v);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  write_file_atomic(path("v.csv"), format_csv({"v"}, m));
  const CsvTable t = read_csv(path("v.csv"));
  ASSERT_EQ(t.rows.rows(), m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_TRUE(same_bits(t.rows(i, 0), m(i, 0))) << m(i, 0);
  // JSON numbers round-trip too.
  const json j = to_json(Eigen::VectorXd(m.col(0)));
  const Eigen::VectorXd back = vector_from_json(json::parse(j.dump()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_TRUE(same_bits(back(i), m(i, 0)));
}

TEST_F(IoTest, CsvHeaderOptionalAndErrors) {
  write_file_atomic(path("a.csv"), "1,2\n3,4\n\n");
  EXPECT_EQ(read_points(path("a.csv")).rows(), 2);
  write_file_atomic(path("b.csv"), "x1,x2\n1,2\n3,oops\n");
  EXPECT_THROW(read_csv(path("b.csv")), UsageError);
  write_file_atomic(path("c.csv"), "1,2\n3\n");
  EXPECT_THROW(read_csv(path("c.csv")), UsageError);
  EXPECT_THROW(read_csv(path("missing.csv")), UsageError);
  write_file_atomic(path("d.csv"), "x1,y1\n0.5,-0.5\n");
  EXPECT_EQ(read_samples(path("d.csv")).values(0, 0), -0.5);
  write_file_atomic(path("e.csv"), "a,b\n0.5,-0.5\n");
  EXPECT_THROW(read_samples(path("e.csv")), UsageError);
}

TEST_F(IoTest, AtomicWriteReplacesWithoutLeftovers) {
  write_file_atomic(path("f.txt"), "one");
  write_file_atomic(path("f.txt"), "two");
  EXPECT_EQ(read_file(path("f.txt")), "two");
  EXPECT_FALSE(fs::exists(path("f.txt.tmp")));
  EXPECT_THROW(write_file_atomic(path("no/such/dir/f.txt"), "x"), UsageError);
}

TEST_F(IoTest, SamplesRoundTrip) {
  const auto sys = testbed::make_system("nonlinear2d");
  const PointSet sites = testbed::make_sites(sys.domain.ambient, 25, testbed::SiteLayout::random, 4);
  const SampleSet z = testbed::generate_data(sys, sites, {testbed::NoiseFamily::uniform, 0.1, 5});
  write_file_atomic(path("z.csv"), format_samples(z));
  const SampleSet back = read_samples(path("z.csv"));
  EXPECT_EQ(back.sites, z.sites);
  EXPECT_EQ(back.values, z.values);
  EXPECT_EQ(format_samples(back), format_samples(z));
}

TEST_F(IoTest, DomainPatchAndValidation) {
  const DomainSpec base = testbed::make_system("linear2d").domain;
  const DomainSpec same = domain_from_json(to_json(base));
  EXPECT_EQ(to_json(same), to_json(base));
  const DomainSpec patched = domain_from_json(json{{"eps", 0.3}, {"gamma", nullptr}}, &base);
  EXPECT_EQ(patched.eps, 0.3);
  EXPECT_FALSE(patched.gamma.has_value());
  EXPECT_EQ(patched.ambient.upper, base.ambient.upper);
  const DomainSpec ball = domain_from_json(
      json{{"omega", {{"type", "ball"}, {"center", {0, 0}}, {"radius", 1.0}}}, {"xbar", nullptr}}, &base);
  EXPECT_TRUE(std::holds_alternative<Ball>(ball.omega));
  EXPECT_FALSE(ball.xbar.has_value());
  EXPECT_THROW(domain_from_json(json{{"eps", -1.0}}, &base), UsageError);
  EXPECT_THROW(domain_from_json(json::object()), UsageError);
  EXPECT_THROW(domain_from_json(json{{"omega", {{"type", "torus"}}}}, &base), UsageError);
}

TEST_F(IoTest, VectorFieldModelRoundTrip) {
  const auto sys = testbed::make_system("linear2d");
  SampleSet z = testbed::generate_data(
      sys, testbed::make_sites(sys.domain.ambient, 40, testbed::SiteLayout::halton, 1),
      {testbed::NoiseFamily::gaussian, 0.05, 2});
  attach_design(z, sys.domain.ambient);
  const VectorFieldModel f = fit_vector_field(z, WendlandKernel(2, 3, 0.6), 0.01);
  const json j = to_json(f);
  const VectorFieldModel g = vector_field_from_json(json::parse(j.dump()));
  EXPECT_EQ(g.coeffs(), f.coeffs());
  EXPECT_EQ(g.centers(), f.centers());
  EXPECT_EQ(g.kernel().scale(), f.kernel().scale());
  EXPECT_EQ(g.provenance().dataset_hash, f.provenance().dataset_hash);
  EXPECT_EQ(to_json(g).dump(), j.dump());
}

TEST_F(IoTest, LyapunovModelRoundTrip) {
  const auto sys = testbed::make_system("decay2d");
  const PointSet q = make_grid(sys.domain.omega, 0.4, sys.domain.excluded_ball());
  PointSet v = -q;
  const Collocation c = make_collocation(q, v);
  const WendlandKernel k(2, 2, 0.2);
  const LyapunovModel vm = fit_V(c, k, PFunction::quadratic(Point::Zero(2)));
  const LyapunovModel tm = fit_T(c, sphere_points(*sys.domain.gamma, 8), k, 1.0,
                                 [](const Eigen::VectorXd& x) { return x(0); });
  for (const LyapunovModel* m : {&vm, &tm}) {
    const json j = to_json(*m);
    const LyapunovModel back = lyapunov_from_json(json::parse(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());
    const Eigen::Vector2d x(0.31, -0.77);
    EXPECT_EQ(back(x), (*m)(x));
  }
}

}  // namespace
}  // namespace kernlyap::io
