#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mddr/common/errors.hpp"
#include "mddr/common/rng.hpp"
#include "mddr/objectives/losses.hpp"

using namespace mddr;
namespace obj = mddr::objectives;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// independent scalar oracle: naive formulas in long double
long double naive_d_loss(const std::vector<double>& real, const std::vector<double>& fake) {
    long double v = 0.0L;
    for (double r : real) v += -std::log(1.0L / (1.0L + std::exp((long double)-r))) / real.size();
    for (double f : fake) {
        const long double s = 1.0L / (1.0L + std::exp((long double)-f));
        v += -std::log(1.0L - s) / fake.size();
    }
    return v;
}

// generic central-difference gradient checker in double precision
template <typename ValueFn>
void fd_check(const std::vector<double>& x, const std::vector<double>& analytic, ValueFn value,
              double step = 1e-3, double tol = 1e-4) {
    REQUIRE(x.size() == analytic.size());
    for (size_t i = 0; i < x.size(); ++i) {
        std::vector<double> xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        const double numeric = (value(xp) - value(xm)) / (2 * step);
        const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic[i])});
        CHECK(std::abs(numeric - analytic[i]) / denom <= tol);
    }
}

}  // namespace

TEST_CASE("gan_loss_discriminator: symmetric point, perfect limit, oracle") {
    // sigma(0) = 0.5 on both sides -> 2 log 2
    std::vector<double> zeros2{0.0, 0.0}, zeros1{0.0};
    CHECK(obj::gan_loss_discriminator(zeros2, zeros1).value ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));

    // confident discriminator -> 0
    std::vector<double> high{30.0}, low{-30.0};
    CHECK(obj::gan_loss_discriminator(high, low).value == doctest::Approx(0.0).epsilon(1e-9));

    std::vector<double> real{0.3, -0.2}, fake{0.1};
    const auto lv = obj::gan_loss_discriminator(real, fake);
    CHECK(lv.value == doctest::Approx(static_cast<double>(naive_d_loss(real, fake))).epsilon(1e-6));
    CHECK(lv.value ==
          doctest::Approx(lv.component("gan_real") + lv.component("gan_fake")).epsilon(1e-12));

    CHECK_THROWS_AS(obj::gan_loss_discriminator({}, fake), ValidationError);
    CHECK_THROWS_AS(obj::gan_loss_discriminator(real, {}), ValidationError);
}

TEST_CASE("gan_loss_generator: values and errors") {
    std::vector<double> zero{0.0};
    CHECK(obj::gan_loss_generator(zero).value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    std::vector<double> high{30.0};
    CHECK(obj::gan_loss_generator(high).value == doctest::Approx(0.0).epsilon(1e-9));

    std::vector<double> fake{2.0, -1.0};
    long double oracle = 0.0L;
    for (double f : fake) {
        oracle += -std::log(1.0L / (1.0L + std::exp((long double)-f))) / fake.size();
    }
    CHECK(obj::gan_loss_generator(fake).value ==
          doctest::Approx(static_cast<double>(oracle)).epsilon(1e-6));
    CHECK_THROWS_AS(obj::gan_loss_generator({}), ValidationError);
}

TEST_CASE("aux_class_loss: uniform, confident, K=3 oracle, validation") {
    // uniform logits over K=2 -> log 2
    std::vector<double> logits{0.0, 0.0, 0.0, 0.0};
    std::vector<int> labels{0, 1};
    CHECK(obj::aux_class_loss(logits, labels, {}, {}, 2).value ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));

    // confident correct single item
    std::vector<double> conf{10.0, -10.0};
    std::vector<int> l0{0};
    CHECK(obj::aux_class_loss(conf, l0, {}, {}, 2).value < 1e-4);

    // K=3 mixed real+fake batch against a scalar oracle
    std::vector<double> lr{0.3, -0.1, 0.8, 1.0, 0.0, -0.5};
    std::vector<int> yr{2, 0};
    std::vector<double> lf{0.2, 0.4, -0.7};
    std::vector<int> yf{1};
    long double oracle = 0.0L;
    auto row_ce = [](const double* row, int y, int K) {
        long double m = row[0];
        for (int k = 1; k < K; ++k) m = std::max<long double>(m, row[k]);
        long double z = 0.0L;
        for (int k = 0; k < K; ++k) z += std::exp(row[k] - m);
        return m + std::log(z) - row[y];
    };
    oracle += row_ce(lr.data(), yr[0], 3) + row_ce(lr.data() + 3, yr[1], 3);
    oracle += row_ce(lf.data(), yf[0], 3);
    oracle /= 3.0L;
    CHECK(obj::aux_class_loss(lr, yr, lf, yf, 3).value ==
          doctest::Approx(static_cast<double>(oracle)).epsilon(1e-6));

    std::vector<int> bad{3};
    CHECK_THROWS_AS(obj::aux_class_loss(lf, bad, {}, {}, 3), ValidationError);
    CHECK_THROWS_AS(obj::aux_class_loss({}, {}, {}, {}, 2), ValidationError);
}

TEST_CASE("dr_objective: default lambda, zero cls, linearity") {
    CHECK(obj::dr_objective(1.0, 0.5, {1.0}).value == doctest::Approx(1.5));
    CHECK(obj::dr_objective(0.7, 0.0, {3.0}).value == doctest::Approx(0.7));
    CHECK(obj::dr_objective(1.0, 0.5, {2.0}).value == doctest::Approx(2.0));

    // exact affinity in lambda with slope cls_part
    const double gan = 0.37, cls = 0.81;
    const double v1 = obj::dr_objective(gan, cls, {1.25}).value;
    const double v2 = obj::dr_objective(gan, cls, {2.5}).value;
    CHECK(v2 - v1 == doctest::Approx(1.25 * cls).epsilon(1e-12));

    CHECK_THROWS_AS(obj::dr_objective(1.0, 1.0, {0.0}), ValidationError);
    CHECK_THROWS_AS(obj::dr_objective(std::nan(""), 1.0, {1.0}), ValidationError);
}

TEST_CASE("binary_ce: canonical values and hand-computed batch") {
    std::vector<double> l{0.0};
    std::vector<int> y1{1};
    CHECK(obj::binary_ce(l, y1).value == doctest::Approx(std::log(2.0)).epsilon(1e-9));

    std::vector<double> low{-30.0};
    std::vector<int> y0{0};
    CHECK(obj::binary_ce(low, y0).value == doctest::Approx(0.0).epsilon(1e-9));

    // {(y=1, p=0.8), (y=0, p=0.4)} -> (-log 0.8 - log 0.6)/2
    std::vector<double> lb{logit(0.8), logit(0.4)};
    std::vector<int> yb{1, 0};
    CHECK(obj::binary_ce(lb, yb).value ==
          doctest::Approx((-std::log(0.8) - std::log(0.6)) / 2.0).epsilon(1e-9));
    CHECK(obj::binary_ce(lb, yb).value == doctest::Approx(0.3670).epsilon(1e-3));

    CHECK_THROWS_AS(obj::binary_ce({}, {}), ValidationError);
    std::vector<int> bad{2};
    CHECK_THROWS_AS(obj::binary_ce(l, bad), ValidationError);
}

TEST_CASE("l1_reconstruction: identity, saturated, toy") {
    std::vector<double> a{0.25, 0.5, 0.75, 1.0};
    CHECK(obj::l1_reconstruction(a, a, 2).value == doctest::Approx(0.0));

    std::vector<double> ones{1.0, 1.0}, zeros{0.0, 0.0};
    CHECK(obj::l1_reconstruction(ones, zeros, 1).value == doctest::Approx(1.0));

    std::vector<double> x{1.0, 2.0}, r{0.0, 4.0};
    CHECK(obj::l1_reconstruction(x, r, 1).value == doctest::Approx(1.5));

    std::vector<double> short1{1.0};
    CHECK_THROWS_AS(obj::l1_reconstruction(x, short1, 1), ShapeError);
    CHECK_THROWS_AS(obj::l1_reconstruction(x, r, 3), ShapeError);
}

TEST_CASE("gradient checks: 20 random batches per loss vs central differences") {
    Rng rng(123);
    auto rand_vec = [&](int n, double scale) {
        std::vector<double> v(static_cast<size_t>(n));
        for (auto& x : v) x = scale * rng.normal();
        return v;
    };

    for (int trial = 0; trial < 20; ++trial) {
        const int nr = 1 + rng.uniform_int(6);
        const int nf = 1 + rng.uniform_int(6);

        SUBCASE("") {}  // keep doctest quiet about loop structure

        {
            auto real = rand_vec(nr, 2.0), fake = rand_vec(nf, 2.0);
            std::vector<double> gr(real.size()), gf(fake.size());
            obj::gan_loss_discriminator_grad(real, fake, gr, gf);
            fd_check(real, gr, [&](const std::vector<double>& v) {
                return obj::gan_loss_discriminator(v, fake).value;
            });
            fd_check(fake, gf, [&](const std::vector<double>& v) {
                return obj::gan_loss_discriminator(real, v).value;
            });
        }
        {
            auto fake = rand_vec(nf, 2.0);
            std::vector<double> gf(fake.size());
            obj::gan_loss_generator_grad(fake, gf);
            fd_check(fake, gf, [&](const std::vector<double>& v) {
                return obj::gan_loss_generator(v).value;
            });
        }
        {
            const int K = 2 + rng.uniform_int(3);
            auto lr = rand_vec(nr * K, 1.5), lf = rand_vec(nf * K, 1.5);
            std::vector<int> yr(static_cast<size_t>(nr)), yf(static_cast<size_t>(nf));
            for (auto& y : yr) y = rng.uniform_int(K);
            for (auto& y : yf) y = rng.uniform_int(K);
            std::vector<double> gr(lr.size()), gf(lf.size());
            obj::aux_class_loss_grad(lr, yr, lf, yf, K, gr, gf);
            fd_check(lr, gr, [&](const std::vector<double>& v) {
                return obj::aux_class_loss(v, yr, lf, yf, K).value;
            });
            fd_check(lf, gf, [&](const std::vector<double>& v) {
                return obj::aux_class_loss(lr, yr, v, yf, K).value;
            });
        }
        {
            auto l = rand_vec(nr, 2.0);
            std::vector<int> y(static_cast<size_t>(nr));
            for (auto& v : y) v = rng.uniform_int(2);
            std::vector<double> g(l.size());
            obj::binary_ce_grad(l, y, g);
            fd_check(l, g, [&](const std::vector<double>& v) { return obj::binary_ce(v, y).value; });
        }
        {
            // keep |x - r| away from the kink so central differences are valid
            const int per = 3;
            auto x = rand_vec(nr * per, 1.0);
            auto r = rand_vec(nr * per, 1.0);
            for (size_t i = 0; i < x.size(); ++i) {
                if (std::abs(x[i] - r[i]) < 0.05) r[i] += 0.1;
            }
            std::vector<double> gx(x.size()), grr(r.size());
            obj::l1_reconstruction_grad(x, r, nr, gx, grr);
            fd_check(x, gx, [&](const std::vector<double>& v) {
                return obj::l1_reconstruction(v, r, nr).value;
            });
            fd_check(r, grr, [&](const std::vector<double>& v) {
                return obj::l1_reconstruction(x, v, nr).value;
            });
        }
        {
            // dr_objective as a function of (gan, cls)
            const double lambda = 0.5 + rng.uniform();
            std::vector<double> parts{rng.normal(), rng.normal()};
            std::vector<double> grad{1.0, lambda};
            fd_check(parts, grad, [&](const std::vector<double>& v) {
                return obj::dr_objective(v[0], v[1], {lambda}).value;
            });
        }
    }
}

TEST_CASE("properties: non-negativity and permutation invariance") {
    Rng rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + rng.uniform_int(8);
        std::vector<double> logits(static_cast<size_t>(n));
        std::vector<int> ybin(static_cast<size_t>(n));
        for (auto& v : logits) v = 3.0 * rng.normal();
        for (auto& v : ybin) v = rng.uniform_int(2);

        CHECK(obj::binary_ce(logits, ybin).value >= 0.0);
        CHECK(obj::gan_loss_generator(logits).value >= 0.0);
        CHECK(obj::gan_loss_discriminator(logits, logits).value >= 0.0);

        // permutation invariance
        std::vector<size_t> perm(static_cast<size_t>(n));
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (size_t i = perm.size() - 1; i > 0; --i) {
            std::swap(perm[i], perm[static_cast<size_t>(rng.uniform_int(static_cast<int>(i) + 1))]);
        }
        std::vector<double> pl(logits.size());
        std::vector<int> py(ybin.size());
        for (size_t i = 0; i < perm.size(); ++i) {
            pl[i] = logits[perm[i]];
            py[i] = ybin[perm[i]];
        }
        CHECK(obj::binary_ce(logits, ybin).value ==
              doctest::Approx(obj::binary_ce(pl, py).value).epsilon(1e-12));
        CHECK(obj::gan_loss_generator(logits).value ==
              doctest::Approx(obj::gan_loss_generator(pl).value).epsilon(1e-12));

        const int K = 3;
        std::vector<double> cls(static_cast<size_t>(n * K));
        std::vector<int> yk(static_cast<size_t>(n));
        for (auto& v : cls) v = rng.normal();
        for (auto& v : yk) v = rng.uniform_int(K);
        CHECK(obj::aux_class_loss(cls, yk, {}, {}, K).value >= 0.0);
        std::vector<double> pcls(cls.size());
        for (size_t i = 0; i < perm.size(); ++i) {
            for (int k = 0; k < K; ++k) pcls[i * K + static_cast<size_t>(k)] = cls[perm[i] * K + static_cast<size_t>(k)];
            py[i] = yk[perm[i]];
        }
        CHECK(obj::aux_class_loss(cls, yk, {}, {}, K).value ==
              doctest::Approx(obj::aux_class_loss(pcls, py, {}, {}, K).value).epsilon(1e-12));
    }
}
