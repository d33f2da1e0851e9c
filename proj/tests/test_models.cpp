#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "aqlock/models.hpp"
#include "aqlock/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace aqlock;
using namespace aqlock::models;

namespace {

Matrix linear_targets(const Matrix& x, SplitMix64& rng, double noise) {
    Matrix y(x.rows(), 2);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double a = 1.0, b = -2.0;
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            a += (0.5 + static_cast<double>(c)) * x(r, c);
            b -= 0.25 * static_cast<double>(c % 3) * x(r, c);
        }
        y(r, 0) = a + noise * rng.normal();
        y(r, 1) = b + noise * rng.normal();
    }
    return y;
}

SupervisedSet synth_set(PollutantKind p = PollutantKind::NO2) {
    static const auto cities = synth::ingest(synth::generate({}));
    return build_supervised(cities, p);
}

}  // namespace

// Trees ----------------------------------------------------------------------

TEST_CASE("root split equals exhaustive enumeration") {
    SplitMix64 rng(10);
    for (int t = 0; t < 60; ++t) {
        const auto n = 2 + static_cast<Eigen::Index>(rng.below(39));
        const Matrix x = testing::random_matrix(rng, n, 3);
        const Matrix y = testing::random_matrix(rng, n, 2);
        std::vector<std::size_t> rows(static_cast<std::size_t>(n));
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        const auto got = find_best_split(x, y, {}, rows, 1);
        const auto want = oracle::best_split(x, y);
        REQUIRE(got.has_value() == want.has_value());
        if (!got) continue;
        CHECK(got->feature == want->feature);
        CHECK(got->threshold == want->threshold);
        CHECK(got->child_sse == doctest::Approx(want->sse).epsilon(1e-9));
    }
}

TEST_CASE("tree depth and leaf constraints") {
    SplitMix64 rng(11);
    const Matrix x = testing::random_matrix(rng, 200, 4);
    const Matrix y = testing::random_matrix(rng, 200, 2);
    for (int depth : {0, 1, 3, 5}) {
        TreeParams p;
        p.max_depth = depth;
        const auto tree = RegressionTree::fit(x, y, {}, p);
        CHECK(tree.depth() <= depth);
    }
    TreeParams p;
    p.max_depth = 20;
    p.min_samples_leaf = 7;
    const auto tree = RegressionTree::fit(x, y, {}, p);
    for (const auto& node : tree.nodes()) {
        if (node.is_leaf()) CHECK(node.weight >= 7.0);
    }
}

TEST_CASE("every leaf holds the mean of the rows routed to it") {
    SplitMix64 rng(12);
    const Matrix x = testing::random_matrix(rng, 150, 4);
    const Matrix y = testing::random_matrix(rng, 150, 2);
    const auto tree = RegressionTree::fit(x, y, {}, {});
    std::map<std::size_t, std::vector<Eigen::Index>> routed;
    std::vector<double> row(4);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) row[static_cast<std::size_t>(c)] = x(r, c);
        routed[tree.leaf_of(row)].push_back(r);
    }
    for (const auto& [leaf, rows] : routed) {
        for (Eigen::Index o = 0; o < 2; ++o) {
            double mean = 0;
            for (auto r : rows) mean += y(r, o);
            mean /= static_cast<double>(rows.size());
            CHECK(tree.nodes()[leaf].value[static_cast<std::size_t>(o)] == doctest::Approx(mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("a deep tree interpolates distinct training points") {
    SplitMix64 rng(12);
    const Matrix x = testing::random_matrix(rng, 30, 2);
    const Matrix y = testing::random_matrix(rng, 30, 2);
    TreeParams p;
    p.max_depth = 40;
    const auto tree = RegressionTree::fit(x, y, {}, p);
    CHECK((tree.predict(x) - y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tree JSON round trip") {
    SplitMix64 rng(13);
    const Matrix x = testing::random_matrix(rng, 50, 3);
    const Matrix y = testing::random_matrix(rng, 50, 2);
    const auto tree = RegressionTree::fit(x, y, {}, {});
    const auto back = RegressionTree::from_json(tree.to_json());
    CHECK(back == tree);
    CHECK(back.predict(x) == tree.predict(x));
}

// Forests --------------------------------------------------------------------

TEST_CASE("forest prediction is the member mean") {
    SplitMix64 rng(20);
    const Matrix x = testing::random_matrix(rng, 80, 4);
    const Matrix y = testing::random_matrix(rng, 80, 2);
    ForestParams p;
    p.n_trees = 12;
    const auto forest = Forest::fit(x, y, p, 2);
    CHECK(forest.trees().size() == 12);
    Matrix mean = Matrix::Zero(x.rows(), 2);
    for (const auto& t : forest.trees()) mean += t.predict(x);
    mean /= 12.0;
    CHECK((forest.predict(x) - mean).cwiseAbs().maxCoeff() < 1e-15);
    for (const auto& t : forest.trees()) CHECK(t.depth() <= 5);
}

TEST_CASE("forest determinism") {
    SplitMix64 rng(21);
    const Matrix x = testing::random_matrix(rng, 60, 4);
    const Matrix y = testing::random_matrix(rng, 60, 2);
    ForestParams p;
    p.n_trees = 10;
    p.max_features = 2;
    const auto a = Forest::fit(x, y, p, 2, 1);
    CHECK(Forest::fit(x, y, p, 2, 1) == a);
    CHECK(Forest::fit(x, y, p, 2, 4) == a);
    CHECK_FALSE(Forest::fit(x, y, p, 3, 1) == a);
    const auto seeds = tree_seeds(2, 10);
    CHECK(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == 10);
    CHECK(Forest::from_json(a.to_json()) == a);
}

// Linear models --------------------------------------------------------------

TEST_CASE("ridge with zero penalty is OLS") {
    SplitMix64 rng(30);
    for (int t = 0; t < 20; ++t) {
        const Matrix x = testing::random_matrix(rng, 40, 5);
        const Matrix y = linear_targets(x, rng, 0.1);
        const auto ols = fit_ols(x, y);
        const auto ridge = fit_ridge(x, y, {0.0});
        CHECK((ols.weights - ridge.weights).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((ols.intercept - ridge.intercept).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("ridge weight norm shrinks as the penalty grows") {
    SplitMix64 rng(31);
    const Matrix x = testing::random_matrix(rng, 50, 6);
    const Matrix y = linear_targets(x, rng, 0.3);
    double previous = INFINITY;
    for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4}) {
        const double norm = fit_ridge(x, y, {lambda}).standardized_weights.norm();
        CHECK(norm <= previous * (1 + 1e-12));
        previous = norm;
    }
}

TEST_CASE("OLS residuals are orthogonal to the design") {
    SplitMix64 rng(31);
    const Matrix x = testing::random_matrix(rng, 100, 6, 0.0, 10.0);
    const Matrix y = linear_targets(x, rng, 1.0);
    const auto m = fit_ols(x, y);
    const Matrix resid = y - m.predict(x);
    CHECK(resid.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
    CHECK((x.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_FALSE(m.rank_deficient);
}

TEST_CASE("OLS flags a rank-deficient design") {
    SplitMix64 rng(32);
    Matrix x = testing::random_matrix(rng, 30, 3);
    x.col(2) = x.col(0);
    const Matrix y = linear_targets(x, rng, 0.1);
    const auto m = fit_ols(x, y);
    CHECK(m.rank_deficient);
    CHECK(m.predict(x).allFinite());
}

TEST_CASE("OLS recovers an exact linear map") {
    SplitMix64 rng(33);
    const Matrix x = testing::random_matrix(rng, 50, 4);
    const Matrix y = linear_targets(x, rng, 0.0);
    const auto m = fit_ols(x, y);
    CHECK(m.weights(0, 0) == doctest::Approx(0.5));
    CHECK(m.weights(3, 0) == doctest::Approx(3.5));
    CHECK(m.intercept(1) == doctest::Approx(-2.0));
}

TEST_CASE("lasso at lambda_max keeps every weight at zero") {
    SplitMix64 rng(34);
    for (int t = 0; t < 20; ++t) {
        const Matrix x = testing::random_matrix(rng, 40, 5);
        const Matrix y = linear_targets(x, rng, 0.5);
        const auto s = standardize(x);
        const Vector u = standardize(y).z.col(0);
        const double lmax = lasso_lambda_max(s.z, u);
        for (double factor : {1.0, 1.5}) {
            const Vector b = lasso_coordinate_descent(s.z, u, {lmax * factor, 1e-10, 1000});
            CHECK(b.cwiseAbs().maxCoeff() == 0.0);
        }
        const Vector below = lasso_coordinate_descent(s.z, u, {lmax * 0.9, 1e-10, 1000});
        CHECK(below.cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("lasso objective never increases across sweeps") {
    SplitMix64 rng(35);
    for (int t = 0; t < 20; ++t) {
        const Matrix x = testing::random_matrix(rng, 30, 6);
        const Matrix y = linear_targets(x, rng, 0.3);
        const auto s = standardize(x);
        const Vector u = standardize(y).z.col(0);
        std::vector<double> trace;
        int sweeps = 0;
        lasso_coordinate_descent(s.z, u, {0.05, 1e-12, 500}, &sweeps, &trace);
        REQUIRE(trace.size() >= 2);
        for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] * (1 + 1e-12));
    }
}

TEST_CASE("SGD regression approaches the least-squares fit") {
    SplitMix64 rng(36);
    const Matrix x = testing::random_matrix(rng, 400, 3);
    const Matrix y = linear_targets(x, rng, 0.01);
    SgdParams p;
    p.epochs = 50;
    const auto m = fit_sgd(x, y, p, 1);
    const Matrix resid = y - m.predict(x);
    CHECK(std::sqrt(resid.col(0).squaredNorm() / 400.0) < 0.1);
    CHECK(fit_sgd(x, y, p, 1).weights == m.weights);
}

// kNN ------------------------------------------------------------------------

TEST_CASE("kNN averages the nearest rows") {
    Matrix x(5, 1), y(5, 2);
    x << 0, 1, 2, 3, 10;
    y << 0, 0, 1, 10, 2, 20, 3, 30, 10, 100;
    const auto m = KnnModel::fit(x, y, {2});
    Matrix q(1, 1);
    q << 0.9;
    // Nearest: x=1 then x=0 (distance 0.9) beating x=2 (1.1).
    CHECK(m.predict(q)(0, 0) == doctest::Approx(0.5));
    q << 1.5;
    // x=1 and x=2 tie; both are used.
    CHECK(m.predict(q)(0, 1) == doctest::Approx(15.0));
    const auto one = KnnModel::fit(x, y, {1});
    CHECK(one.predict(x) == y);
    CHECK(KnnModel::from_json(m.to_json()).predict(x) == m.predict(x));
}

TEST_CASE("kNN is unchanged by duplicating the training set and doubling k") {
    SplitMix64 rng(44);
    const Matrix x = testing::random_matrix(rng, 40, 3);
    const Matrix y = testing::random_matrix(rng, 40, 2);
    Matrix x2(80, 3), y2(80, 2);
    x2 << x, x;
    y2 << y, y;
    const Matrix q = testing::random_matrix(rng, 25, 3);
    for (int k : {1, 3, 5}) {
        const Matrix a = KnnModel::fit(x, y, {k}).predict(q);
        const Matrix b = KnnModel::fit(x2, y2, {2 * k}).predict(q);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("kNN distance ties fall to the lower row index") {
    Matrix x(3, 1), y(3, 2);
    x << 0, 2, 2;
    y << 0, 0, 5, 5, 9, 9;
    const auto m = KnnModel::fit(x, y, {2});
    Matrix q(1, 1);
    q << 1.0;
    // Rows 0 and 1 are at distance 1, row 2 too; rows 0 and 1 win.
    CHECK(m.predict(q)(0, 0) == doctest::Approx(2.5));
}

// AdaBoost -------------------------------------------------------------------

TEST_CASE("weighted median picks the lower median") {
    const std::vector<double> v = {3, 1, 2}, w = {1, 1, 1};
    CHECK(weighted_median(v, w) == 2.0);
    const std::vector<double> v2 = {1, 2}, w2 = {1, 1};
    CHECK(weighted_median(v2, w2) == 1.0);
    const std::vector<double> w3 = {1, 3};
    CHECK(weighted_median(v2, w3) == 2.0);
}

TEST_CASE("a one-estimator ensemble is its base tree") {
    SplitMix64 rng(40);
    for (int t = 0; t < 10; ++t) {
        const Matrix x = testing::random_matrix(rng, 60, 3);
        const Matrix y = testing::random_matrix(rng, 60, 2);
        AdaBoostParams p;
        p.n_estimators = 1;
        const auto model = AdaBoostModel::fit(x, y, p);
        TreeParams base;
        base.max_depth = 3;
        for (Eigen::Index o = 0; o < 2; ++o) {
            const Matrix target = y.col(o);
            const auto tree = RegressionTree::fit(x, target, {}, base);
            CHECK(model.predict(x).col(o) == tree.predict(x).col(0));
        }
    }
}

TEST_CASE("estimator weights are finite and positive") {
    SplitMix64 rng(41);
    for (int t = 0; t < 10; ++t) {
        const Matrix x = testing::random_matrix(rng, 60, 3);
        const Matrix y = testing::random_matrix(rng, 60, 2);
        const auto model = AdaBoostModel::fit(x, y, {});
        for (const auto& e : model.ensembles()) {
            REQUIRE_FALSE(e.trees.empty());
            CHECK(e.trees.size() == e.weights.size());
            for (double w : e.weights) {
                CHECK(std::isfinite(w));
                CHECK(w > 0.0);
            }
        }
    }
}

TEST_CASE("boosting stops on a perfect fit") {
    Matrix x(4, 1), y(4, 2);
    x << 0, 1, 2, 3;
    y << 1, 1, 1, 1, 2, 2, 2, 2;
    const auto model = AdaBoostModel::fit(x, y, {});
    for (const auto& e : model.ensembles()) {
        CHECK(e.trees.size() == 1);
        CHECK(e.halted_early);
    }
    CHECK(model.predict(x) == y);
}

// Network --------------------------------------------------------------------

TEST_CASE("activations") {
    CHECK(selu(0.0) == 0.0);
    CHECK(std::fabs(selu(1e-15) - selu(-1e-15)) < 1e-12);
    CHECK(selu(1.0) == doctest::Approx(kSeluScale));
    CHECK(selu(-50.0) == doctest::Approx(-kSeluScale * kSeluAlpha));
    CHECK(sigmoid(0.0) == 0.5);
    for (double z : {-2.0, -0.3, 0.4, 3.0}) {
        const double h = 1e-6;
        CHECK(selu_derivative(z) == doctest::Approx((selu(z + h) - selu(z - h)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("backpropagation matches central differences") {
    SplitMix64 rng(50);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::vector<int> hidden = {20, 10, 20};
        const Mlp net(10, hidden, 2, seed);
        CHECK(net.parameter_count() == 10 * 20 + 20 + 20 * 10 + 10 + 10 * 20 + 20 + 20 * 2 + 2);
        const Matrix x = testing::random_matrix(rng, 4, 10, 0.0, 1.0);
        const Matrix y = testing::random_matrix(rng, 4, 2, 0.0, 1.0);
        CHECK(gradient_check(net, x, y) < 1e-4);
    }
}

TEST_CASE("network outputs stay inside the sigmoid range") {
    const auto set = synth_set();
    MlpParams p;
    p.epochs = 20;
    const auto model = MlpModel::fit(set.inputs, set.targets, p, 7);
    SplitMix64 rng(51);
    const Matrix probe = testing::random_matrix(rng, 100, 10, -5.0, 5.0);
    const Matrix out = model.predict_scaled(probe);
    CHECK(out.minCoeff() > 0.0);
    CHECK(out.maxCoeff() < 1.0);
    CHECK(MlpModel::fit(set.inputs, set.targets, p, 7).predict(set.inputs) == model.predict(set.inputs));
}

// Registry -------------------------------------------------------------------

TEST_CASE("model specs") {
    CHECK(ModelSpec::defaults(ModelKind::rfr).seed == 2);
    CHECK(ModelSpec::defaults(ModelKind::madab).get<AdaBoostParams>().n_estimators == 5);
    CHECK(ModelSpec::defaults(ModelKind::dtr).get<TreeParams>().max_depth == 5);
    for (auto k : kAllModelKinds) {
        CHECK(parse_model_kind(to_string(k)) == k);
        const auto spec = ModelSpec::defaults(k);
        CHECK(ModelSpec::from_json(spec.to_json()) == spec);
    }
    const auto spec = ModelSpec::from_json({{"kind", "madab"}, {"params", {{"estimators", 3}}}});
    CHECK(spec.get<AdaBoostParams>().n_estimators == 3);
    CHECK_THROWS_KIND(ModelSpec::from_json({{"kind", "knn"}, {"params", {{"kk", 3}}}}), ErrorKind::Config);
    CHECK_THROWS_KIND(ModelSpec::from_json({{"kind", "svm"}}), ErrorKind::Config);
    CHECK_THROWS_KIND(ModelSpec::from_json({{"kind", "knn"}, {"colour", 1}}), ErrorKind::Config);
}

TEST_CASE("every kind fits, predicts and reloads bit-identically") {
    const auto set = synth_set();
    for (auto k : kAllModelKinds) {
        CAPTURE(to_string(k));
        auto spec = ModelSpec::defaults(k);
        if (k == ModelKind::dnn) spec.params = MlpParams{{20, 10, 20}, 30, 16, 0.01};
        if (k == ModelKind::rfr) spec.params = ForestParams{10, 5, 1, 0, true};
        const auto model = fit(spec, set);
        CHECK(model.pollutant() == PollutantKind::NO2);
        const Matrix pred = model.predict(set.inputs);
        CHECK(pred.rows() == static_cast<Eigen::Index>(set.rows()));
        CHECK(pred.cols() == 2);
        CHECK(pred.allFinite());
        const auto back = TrainedModel::from_json(nlohmann::json::parse(model.to_json().dump()));
        CHECK(back.predict(set.inputs) == pred);
        CHECK(back.spec() == spec);
    }
}

TEST_CASE("fit and predict validate shapes") {
    const auto set = synth_set();
    const auto model = fit(ModelSpec::defaults(ModelKind::linreg), set);
    CHECK_THROWS_KIND(model.predict(Matrix::Zero(2, 9)), ErrorKind::Shape);
    Matrix bad = set.inputs.topRows(2);
    bad(0, 0) = NAN;
    CHECK_THROWS_KIND(model.predict(bad), ErrorKind::Domain);
    CHECK_THROWS_KIND(fit(ModelSpec::defaults(ModelKind::linreg), set.select(std::vector<std::size_t>{0})),
                      ErrorKind::InsufficientData);
    CHECK(gradient_check(ModelSpec::defaults(ModelKind::dnn), std::vector<double>(10, 0.5),
                         std::vector<double>{0.2, 0.7}) < 1e-4);
    CHECK_THROWS_KIND(gradient_check(ModelSpec::defaults(ModelKind::knn), std::vector<double>(10, 0.5),
                                     std::vector<double>{0.2, 0.7}),
                      ErrorKind::Config);
}
