#include "evnet/transforms.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace evnet;
using std::numbers::pi;

namespace {

void expect_matches_direct_sum(const Trajectory& x) {
  const Spectrum s = dft_forward(x);
  const Eigen::Index m = x.cols();
  ASSERT_EQ(s.rows(), x.rows());
  ASSERT_EQ(s.cols(), 2 * m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto ref = oracle::dft(oracle::column(x, c));
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      EXPECT_NEAR(s(k, c), std::abs(ref[k]), 1e-12);
      // Compare the complex value rebuilt from amplitude/phase; the phase of
      // a vanishing bin is arbitrary in the oracle.
      const std::complex<double> rebuilt = std::polar(s(k, c), s(k, m + c));
      EXPECT_NEAR(std::abs(rebuilt - ref[k]), 0.0, 1e-12);
    }
  }
}

}  // namespace

TEST(ShapeMap, Examples) {
  EXPECT_EQ(shape_map(TransformKind::dft, 8, 2), (SpectrumShape{8, 4}));
  EXPECT_EQ(shape_map(TransformKind::haar, 20, 4), (SpectrumShape{10, 8}));
  EXPECT_EQ(shape_map(TransformKind::identity, 8, 2), (SpectrumShape{8, 2}));
  EXPECT_THROW(shape_map(TransformKind::haar, 7, 2), std::invalid_argument);
}

TEST(Dft, ConstantSignal) {
  const double c = 1.5;
  const Spectrum s = dft_forward(Trajectory::Constant(4, 1, c));
  EXPECT_NEAR(s(0, 0), 2 * c, 1e-15);
  for (int k = 1; k < 4; ++k) {
    EXPECT_NEAR(s(k, 0), 0.0, 1e-15);
    EXPECT_EQ(s(k, 1), 0.0);  // zero-amplitude bins get phase 0
  }
  Spectrum back(4, 2);
  back << 2 * c, 0, 0, 0, 0, 0, 0, 0;
  EXPECT_LT((dft_inverse(back) - Trajectory::Constant(4, 1, c)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dft, RampAgainstDirectSum) {
  Trajectory x(4, 1);
  x << 0, 1, 2, 3;
  expect_matches_direct_sum(x);
  EXPECT_LT((dft_inverse(dft_forward(x)) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dft, RandomAgainstDirectSum) {
  std::mt19937_64 rng(11);
  for (int n : {1, 2, 3, 5, 8, 13, 20})
    for (int m : {1, 2, 4}) expect_matches_direct_sum(oracle::random_matrix(n, m, rng));
}

TEST(Dft, PhaseRange) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Spectrum s = dft_forward(oracle::random_matrix(8, 3, rng));
    EXPECT_GE(s.leftCols(3).minCoeff(), 0.0);
    EXPECT_GT(s.rightCols(3).minCoeff(), -pi);
    EXPECT_LE(s.rightCols(3).maxCoeff(), pi);
  }
  // Nyquist bin of an alternating signal is a negative real: phase +pi.
  Trajectory alt(4, 1);
  alt << 0, 1, 0, 1;
  EXPECT_DOUBLE_EQ(dft_forward(alt)(2, 1), pi);
}

TEST(Dft, RoundTripProperty) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> n_dist(1, 64), m_dist(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const Trajectory x = oracle::random_matrix(n_dist(rng), m_dist(rng), rng, 5.0);
    double residue = -1;
    const Trajectory back = dft_inverse(dft_forward(x), &residue);
    EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(residue, 1e-9);
  }
}

TEST(Dft, ImaginaryResidueOfSynthesizedSpectrum) {
  // A single nonzero bin at k = 1 with no conjugate partner is not the
  // spectrum of a real signal.
  Spectrum s = Spectrum::Zero(4, 2);
  s(1, 0) = 1.0;
  double residue = 0;
  const Trajectory x = dft_inverse(s, &residue);
  std::vector<std::complex<double>> c(4, 0.0);
  c[1] = 1.0;
  const auto ref = oracle::idft(c);
  double ref_residue = 0;
  for (int t = 0; t < 4; ++t) {
    EXPECT_NEAR(x(t, 0), ref[t].real(), 1e-12);
    ref_residue = std::max(ref_residue, std::abs(ref[t].imag()));
  }
  EXPECT_NEAR(residue, ref_residue, 1e-12);
  EXPECT_GT(residue, 0.4);
  EXPECT_THROW(dft_inverse(Spectrum::Zero(4, 3)), std::invalid_argument);
}

TEST(Dft, Linearity) {
  // Amplitude/phase are nonlinear; linearity holds for the complex values.
  std::mt19937_64 rng(14);
  const Trajectory a = oracle::random_matrix(9, 2, rng), b = oracle::random_matrix(9, 2, rng);
  const double alpha = 1.7, beta = -0.4;
  auto complex_col = [](const Spectrum& s, Eigen::Index c, Eigen::Index m) {
    std::vector<std::complex<double>> out;
    for (Eigen::Index k = 0; k < s.rows(); ++k) out.push_back(std::polar(s(k, c), s(k, m + c)));
    return out;
  };
  const Spectrum sa = dft_forward(a), sb = dft_forward(b), sc = dft_forward(Trajectory(alpha * a + beta * b));
  for (Eigen::Index c = 0; c < 2; ++c) {
    const auto ca = complex_col(sa, c, 2), cb = complex_col(sb, c, 2), cc = complex_col(sc, c, 2);
    for (std::size_t k = 0; k < ca.size(); ++k) EXPECT_LT(std::abs(alpha * ca[k] + beta * cb[k] - cc[k]), 1e-12);
  }
}

TEST(Dft, RejectsNonFinite) {
  Trajectory x = Trajectory::Zero(4, 1);
  x(2, 0) = INFINITY;
  EXPECT_THROW(dft_forward(x), std::invalid_argument);
  EXPECT_THROW(dft_forward(Trajectory(0, 2)), std::invalid_argument);
}

TEST(Haar, Examples) {
  const double a = 0.7, b = -2.0;
  Trajectory x(4, 1);
  x << a, a, b, b;
  Spectrum s = haar_forward(x);
  EXPECT_NEAR(s(0, 0), std::sqrt(2.0) * a, 1e-15);
  EXPECT_NEAR(s(1, 0), std::sqrt(2.0) * b, 1e-15);
  EXPECT_EQ(s(0, 1), 0.0);
  EXPECT_EQ(s(1, 1), 0.0);

  x << 1, 2, 3, 4;
  s = haar_forward(x);
  const auto [approx, detail] = oracle::haar({1, 2, 3, 4});
  EXPECT_NEAR(approx[0], 3 / std::sqrt(2.0), 1e-15);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(s(k, 0), approx[k], 1e-12);
    EXPECT_NEAR(s(k, 1), detail[k], 1e-12);
  }
  EXPECT_LT((haar_inverse(s) - x).cwiseAbs().maxCoeff(), 1e-12);

  Spectrum ones(2, 2);
  ones << std::sqrt(2.0), 0, std::sqrt(2.0), 0;
  EXPECT_LT((haar_inverse(ones) - Trajectory::Ones(4, 1)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(haar_forward(Trajectory::Zero(5, 2)), std::invalid_argument);
}

TEST(Haar, RandomAgainstFormula) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 * (1 + trial % 16);
    const Trajectory x = oracle::random_matrix(n, 1 + trial % 6, rng, 3.0);
    const Spectrum s = haar_forward(x);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const auto [approx, detail] = oracle::haar(oracle::column(x, c));
      for (int k = 0; k < n / 2; ++k) {
        EXPECT_NEAR(s(k, c), approx[k], 1e-12);
        EXPECT_NEAR(s(k, x.cols() + c), detail[k], 1e-12);
      }
    }
    EXPECT_LT((haar_inverse(s) - x).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Transforms, DispatchAndShapeConsistency) {
  std::mt19937_64 rng(16);
  for (TransformKind kind : {TransformKind::dft, TransformKind::haar, TransformKind::identity})
    for (int n : {4, 8, 20})
      for (int m : {2, 4, 6}) {
        const Trajectory x = oracle::random_matrix(n, m, rng);
        const Spectrum s = forward_transform(kind, x);
        EXPECT_EQ((SpectrumShape{int(s.rows()), int(s.cols())}), shape_map(kind, n, m));
        EXPECT_LT((inverse_transform(kind, s) - x).cwiseAbs().maxCoeff(), 1e-9);
      }
}

TEST(Parseval, Examples) {
  EXPECT_EQ(parseval_check(Trajectory::Zero(8, 2)).time_energy, 0.0);
  EXPECT_EQ(parseval_check(Trajectory::Zero(8, 2)).freq_energy, 0.0);
  Trajectory x(4, 1);
  x << 0, 1, 2, 3;
  const EnergyPair e = parseval_check(x);
  EXPECT_NEAR(e.time_energy, 14.0, 1e-12);
  EXPECT_NEAR(e.freq_energy, 14.0, 1e-12);
  double oracle_energy = 0;
  for (const auto& c : oracle::dft({0, 1, 2, 3})) oracle_energy += std::norm(c);
  EXPECT_NEAR(oracle_energy, 14.0, 1e-12);
}

TEST(Parseval, RandomBothTransforms) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Trajectory x = oracle::random_matrix(8, 6, rng, 4.0);
    for (TransformKind kind : {TransformKind::dft, TransformKind::haar}) {
      const EnergyPair e = parseval_check(x, kind);
      EXPECT_LT(std::abs(e.time_energy - e.freq_energy) / e.time_energy, 1e-9);
    }
  }
}

TEST(Energy, LinearTrajectory) {
  Trajectory x(8, 1);
  for (int t = 0; t < 8; ++t) x(t, 0) = t;
  const EnergyProfile p = energy_profile(x);
  EXPECT_FALSE(p.degenerate);
  EXPECT_EQ(p.time_fractions(0), 0.0);
  for (int t = 1; t < 8; ++t) EXPECT_GT(p.time_fractions(t), p.time_fractions(t - 1));
  // t^2 / sum t^2 = t^2 / 140.
  for (int t = 0; t < 8; ++t) EXPECT_NEAR(p.time_fractions(t), t * t / 140.0, 1e-12);
  EXPECT_NEAR(p.time_fractions.sum(), 1.0, 1e-9);
  EXPECT_NEAR(p.freq_fractions.sum(), 1.0, 1e-9);
  for (int n = 1; n < 8; ++n) EXPECT_GT(p.freq_fractions(0), p.freq_fractions(n));
}

TEST(Energy, ShiftUsesFirstRowAndAveragesDims) {
  Trajectory x(4, 2);
  x << 5, 1, 6, 1, 7, 1, 8, 1;  // second dim constant: zero energy, skipped
  const EnergyProfile p = energy_profile(x);
  Trajectory one(4, 1);
  one << 0, 1, 2, 3;
  const EnergyProfile q = energy_profile(one);
  EXPECT_LT((p.time_fractions - q.time_fractions).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((p.freq_fractions - q.freq_fractions).cwiseAbs().maxCoeff(), 1e-15);

  std::mt19937_64 rng(18);
  const Trajectory r = oracle::random_matrix(8, 4, rng);
  const EnergyProfile pr = energy_profile(r);
  Eigen::VectorXd manual = Eigen::VectorXd::Zero(8);
  for (int c = 0; c < 4; ++c) {
    double total = 0;
    for (int t = 0; t < 8; ++t) total += std::pow(r(t, c) - r(0, c), 2);
    for (int t = 0; t < 8; ++t) manual(t) += std::pow(r(t, c) - r(0, c), 2) / total / 4.0;
  }
  EXPECT_LT((pr.time_fractions - manual).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE(pr.freq_fractions.minCoeff(), 0.0);
  EXPECT_NEAR(pr.freq_fractions.sum(), 1.0, 1e-9);
}

TEST(Energy, Degenerate) {
  const EnergyProfile p = energy_profile(Trajectory::Constant(8, 2, 3.0));
  EXPECT_TRUE(p.degenerate);
  EXPECT_TRUE(p.time_fractions.allFinite());
  EXPECT_NEAR(p.time_fractions.sum(), 1.0, 1e-12);
  EXPECT_NEAR(p.freq_fractions(3), 1.0 / 8.0, 1e-15);
  EXPECT_THROW(energy_profile(Trajectory::Zero(1, 2)), std::invalid_argument);
}
