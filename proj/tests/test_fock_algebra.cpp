#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magnonkit/fock_algebra.hpp>

using namespace magnonkit;

TEST_CASE("ModeLayout validates its inputs")
{
    CHECK_THROWS_AS(ModeLayout({3, 1}, {"a", "b"}), std::invalid_argument);
    CHECK_THROWS_AS(ModeLayout({3, 3}, {"a", "a"}), std::invalid_argument);
    CHECK_THROWS_AS(ModeLayout({3}, {"a", "b"}), std::invalid_argument);
    CHECK(ModeLayout({3, 4}, {"a", "b"}).total_dim() == 12);
}

TEST_CASE("flatten/unflatten round-trip with first label slowest")
{
    ModeLayout layout({2, 3, 4}, {"a", "b", "c"});
    // first label slowest-varying: idx = ((na)*3 + nb)*4 + nc
    CHECK(layout.flatten(std::vector<int>{1, 2, 3}) == 23);
    CHECK(layout.flatten(std::vector<int>{0, 0, 1}) == 1);
    CHECK(layout.flatten(std::vector<int>{1, 0, 0}) == 12);
    for (int i = 0; i < layout.total_dim(); ++i)
        CHECK(layout.flatten(layout.unflatten(i)) == i);
    CHECK_THROWS_AS(layout.flatten(std::vector<int>{2, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(layout.flatten(std::vector<int>{0, 0}), std::invalid_argument);
}

TEST_CASE("single-mode ladder operator algebra")
{
    const int d = 7;
    const Matrix a = single_mode_annihilation(d);
    const Matrix n = a.adjoint() * a;
    for (int k = 0; k < d; ++k)
        CHECK(n(k, k).real() == doctest::Approx(k));

    // [a, a'] = I everywhere except the truncation corner.
    const Matrix comm = a * a.adjoint() - a.adjoint() * a;
    for (int k = 0; k < d - 1; ++k)
        CHECK(comm(k, k).real() == doctest::Approx(1.0));
    CHECK(comm(d - 1, d - 1).real() == doctest::Approx(-(d - 1)));
}

TEST_CASE("tensor_embed matches explicit Kronecker products")
{
    ModeLayout layout({2, 3}, {"left", "right"});
    const Matrix al = single_mode_annihilation(2);
    const Matrix ar = single_mode_annihilation(3);

    const Matrix big = tensor_embed({{"left", al}, {"right", ar}}, layout);
    REQUIRE(big.rows() == 6);
    for (int i1 = 0; i1 < 2; ++i1)
        for (int j1 = 0; j1 < 2; ++j1)
            for (int i2 = 0; i2 < 3; ++i2)
                for (int j2 = 0; j2 < 3; ++j2)
                    CHECK(big(i1 * 3 + i2, j1 * 3 + j2) ==
                          al(i1, j1) * ar(i2, j2));

    // Identity fill on unspecified modes.
    const Matrix only_right = tensor_embed({{"right", ar}}, layout);
    CHECK((only_right - tensor_embed({{"left", Matrix::Identity(2, 2)}, {"right", ar}},
                                     layout))
              .norm() == doctest::Approx(0.0));
}

TEST_CASE("embedded operators on different modes commute")
{
    ModeLayout layout({3, 3, 3}, {"x", "y", "z"});
    const Matrix ax = annihilation(layout, "x");
    const Matrix nz = number_op(layout, "z");
    CHECK((ax * nz - nz * ax).norm() == doctest::Approx(0.0));
    CHECK((ax.adjoint() * ax - number_op(layout, "x")).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tensor_embed rejects bad shapes and repeats")
{
    ModeLayout layout({2, 3}, {"a", "b"});
    CHECK_THROWS_AS(tensor_embed({{"a", Matrix::Zero(3, 3)}}, layout),
                    std::invalid_argument);
    CHECK_THROWS_AS(tensor_embed({{"a", Matrix::Zero(2, 2)}, {"a", Matrix::Zero(2, 2)}},
                                 layout),
                    std::invalid_argument);
    CHECK_THROWS_AS(tensor_embed({{"c", Matrix::Zero(2, 2)}}, layout),
                    std::invalid_argument);
}

TEST_CASE("is_hermitian")
{
    Matrix m(2, 2);
    m << Complex(1, 0), Complex(0, 1), Complex(0, -1), Complex(2, 0);
    CHECK(is_hermitian(m));
    m(0, 1) = Complex(0.0, 1.0 + 1e-6);
    CHECK(!is_hermitian(m));
    CHECK(is_hermitian(Matrix::Zero(3, 3)));
}
