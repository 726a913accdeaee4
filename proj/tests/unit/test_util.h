#ifndef VCATE_TESTS_UNIT_TEST_UTIL_H_
#define VCATE_TESTS_UNIT_TEST_UTIL_H_

#include <cstdint>

#include <Eigen/Dense>

#include "vcate/data_model.h"
#include "vcate/multistep.h"

namespace vcate::testing {

// Linear experiment with p standard normal covariates and
// tau(x) = 0.2 + slope * x_0, mu0(x) = 0.5 x_1, unit noise.
Dataset LinearExperiment(int n, int p, double slope, std::uint64_t seed, double pscore = 0.5);

// Standard normal matrix.
Eigen::MatrixXd Gaussian(int rows, int cols, std::uint64_t seed);

// Fold estimate with the given statistics and nothing else.
FoldEstimate SyntheticFold(std::size_t n_k, double v_tau, const Eigen::Matrix2d& omega);

}  // namespace vcate::testing

#endif  // VCATE_TESTS_UNIT_TEST_UTIL_H_
