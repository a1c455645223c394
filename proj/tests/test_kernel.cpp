#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ksa/kernel.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace ksa;

TEST_CASE("kernel hand values") {
    Eigen::VectorXd zero1(1), one1(1);
    zero1 << 0.0;
    one1 << 1.0;
    GaussianEmbeddingKernel gauss(EmbeddingNet::basic(1));
    CHECK(gauss.evaluate(one1, one1) == 1.0);
    CHECK(gauss.evaluate(zero1, one1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    Eigen::VectorXd a(2), b(2);
    a << 0, 0;
    b << 3, 0;
    BoxKernel box(2.0);
    CHECK(box.evaluate(a, b) == 0.0);
    CHECK(box.evaluate(a, a) == 1.0);

    ConstantKernel constant;
    CHECK(constant.evaluate(a, b) == 1.0);
    CHECK_THROWS_AS(constant.evaluate(a, zero1), std::invalid_argument);
}

TEST_CASE("kernel symmetry and gaussian range on random pairs") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    GaussianEmbeddingKernel gauss(EmbeddingNet::diag(3));
    BoxKernel box(1.5);
    ConstantKernel constant;
    for (int k = 0; k < 1000; ++k) {
        Eigen::VectorXd x(3), y(3);
        for (int j = 0; j < 3; ++j) {
            x[j] = normal(rng);
            y[j] = normal(rng);
        }
        CHECK(gauss.evaluate(x, y) == gauss.evaluate(y, x));
        CHECK(box.evaluate(x, y) == box.evaluate(y, x));
        CHECK(constant.evaluate(x, y) == constant.evaluate(y, x));
        const double g = gauss.evaluate(x, y);
        CHECK(g > 0.0);
        CHECK(g <= 1.0);
        if (x != y) CHECK(g < 1.0);  // diag net with unit weights is injective
    }
}

TEST_CASE("box kernel reduces to constant beyond the data diameter") {
    std::mt19937_64 rng(23);
    const auto data = oracle::random_dataset(rng, 40, 2, 0.2);
    double diameter = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < data.size(); ++j)
            diameter = std::max(diameter,
                                (data.feature_row(i) - data.feature_row(j)).norm());
    BoxKernel wide(diameter + 1.0);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < data.size(); ++j)
            CHECK(wide.evaluate(data.feature_row(i), data.feature_row(j)) == 1.0);
}

TEST_CASE("kernel_matrix agrees with pointwise evaluation") {
    std::mt19937_64 rng(31);
    const auto rows = oracle::random_dataset(rng, 7, 2, 0.2);
    const auto cols = oracle::random_dataset(rng, 5, 2, 0.2);

    ConstantKernel constant;
    const auto ones = kernel_matrix(constant, rows.subset(std::vector<std::size_t>{0, 1, 2}),
                                    cols.subset(std::vector<std::size_t>{0, 1}));
    CHECK(ones.values.rows() == 3);
    CHECK(ones.values.cols() == 2);
    CHECK(ones.values.minCoeff() == 1.0);
    CHECK(ones.values.maxCoeff() == 1.0);

    GaussianEmbeddingKernel gauss(EmbeddingNet::diag(2));
    const auto km = kernel_matrix(gauss, rows, cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            CHECK(km.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                  doctest::Approx(gauss.evaluate(rows.feature_row(i), cols.feature_row(j)))
                      .epsilon(1e-14));

    const auto square = kernel_matrix(gauss, rows, rows);
    CHECK(square.values.diagonal().minCoeff() == 1.0);
    CHECK((square.values - square.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("load_kernel_matrix validates its input") {
    namespace fs = std::filesystem;
    const auto path = (fs::temp_directory_path() / "ksa_kmat.csv").string();
    {
        std::ofstream out(path);
        out << "1,0\n0,1\n";
    }
    auto kernel = load_kernel_matrix(path);
    CHECK(kernel->at(0, 1) == 0.0);
    CHECK(kernel->at(0, 0) == 1.0);

    {
        std::ofstream out(path);
        out << "1,1.5\n1.5,1\n";
    }
    CHECK_THROWS_AS(load_kernel_matrix(path), std::invalid_argument);

    {
        std::ofstream out(path);
        out << "1,0.5,0\n0.5,1,0\n";
    }
    CHECK_THROWS_AS(load_kernel_matrix(path), std::runtime_error);

    {
        std::ofstream out(path);
        out << "1,0.5\n0.2,1\n";
    }
    CHECK_THROWS_AS(load_kernel_matrix(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("precomputed kernels serve bound points only") {
    std::mt19937_64 rng(41);
    const auto data = oracle::random_dataset(rng, 3, 2, 0.0);
    Eigen::MatrixXd values(3, 3);
    values << 1.0, 0.5, 0.25, 0.5, 1.0, 0.125, 0.25, 0.125, 1.0;
    PrecomputedKernel kernel(values);
    kernel.bind(data);
    CHECK(kernel.evaluate(data.feature_row(0), data.feature_row(1)) == 0.5);
    CHECK(kernel.evaluate(data.feature_row(2), data.feature_row(2)) == 1.0);
    Eigen::VectorXd stranger(2);
    stranger << 99.0, -99.0;
    CHECK_THROWS_AS(kernel.evaluate(stranger, data.feature_row(0)), std::invalid_argument);
}
