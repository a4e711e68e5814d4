#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/eval.hpp"
#include "tunnelkit/search.hpp"

using namespace tunnelkit;

namespace {

HyperSpace toy_space() {
    return HyperSpace{{{"a", -5.0, 5.0, ParamScale::Linear},
                       {"b", 1e-3, 10.0, ParamScale::Log},
                       {"c", 1.0, 8.0, ParamScale::Integer}}};
}

double toy_loss(const Hyperparameters& p) {
    return std::pow(p.at("a") - 1.3, 2) + std::pow(std::log10(p.at("b")) + 1.0, 2) + 0.1 * std::abs(p.at("c") - 4.0);
}

std::vector<DatasetRecord> toy_records(int n_systems, int per_system) {
    std::vector<DatasetRecord> out;
    Rng rng(77);
    for (int s = 0; s < n_systems; ++s) {
        const double eta = rng.uniform(0.0, 0.5);
        for (int i = 0; i < per_system; ++i) {
            DatasetRecord r;
            r.system_id = "sys_" + std::to_string(100 + s);
            r.T = 100.0 + 10.0 * i;
            r.eta = eta;
            r.log10_kie = rng.uniform(0.0, 1.5);
            r.log10_k_tun = rng.uniform(-10.0, 3.0);
            r.log10_kappa = 50.0 / r.T + 0.5 * r.log10_kie + eta;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("search: sampling respects the space") {
    const auto space = toy_space();
    for (auto strategy : {SearchStrategy::Random, SearchStrategy::TPE}) {
        const auto r = search(space, [](int, const Hyperparameters& p) { return toy_loss(p); }, 30, strategy, 5);
        REQUIRE(r.trials.size() == 30);
        for (std::size_t i = 0; i < r.trials.size(); ++i) {
            const auto& p = r.trials[i].params;
            CHECK(r.trials[i].index == static_cast<int>(i));
            CHECK(p.at("a") >= -5.0);
            CHECK(p.at("a") <= 5.0);
            CHECK(p.at("b") >= 1e-3);
            CHECK(p.at("b") <= 10.0);
            CHECK(p.at("c") == std::round(p.at("c")));
            CHECK(p.at("c") >= 1.0);
            CHECK(p.at("c") <= 8.0);
        }
        double best = 1e300;
        for (const auto& t : r.trials) best = std::min(best, t.val_rmse);
        CHECK(r.best_rmse == best);
        CHECK(r.trials[static_cast<std::size_t>(r.best_trial)].val_rmse == best);
    }
}

TEST_CASE("search: budget edge cases and determinism") {
    const auto space = toy_space();
    auto obj = [](int, const Hyperparameters& p) { return toy_loss(p); };
    const auto one = search(space, obj, 1, SearchStrategy::TPE, 3);
    CHECK(one.trials.size() == 1);
    CHECK(one.best_trial == 0);
    CHECK_THROWS_AS(search(space, obj, 0, SearchStrategy::TPE, 3), Error);

    const auto a = search(space, obj, 25, SearchStrategy::TPE, 8);
    const auto b = search(space, obj, 25, SearchStrategy::TPE, 8);
    CHECK(trial_log_to_csv(Family::XGB, a.trials) == trial_log_to_csv(Family::XGB, b.trials));
    CHECK(trial_log_to_csv(Family::XGB, a.trials).rfind("trial,family,params_json,val_rmse\n", 0) == 0);
}

TEST_CASE("search: failed trials are recorded and skipped") {
    const auto space = toy_space();
    const auto r = search(
        space,
        [](int i, const Hyperparameters& p) {
            if (i % 2 == 0) throw Error(ErrorKind::Training, "boom");
            return toy_loss(p);
        },
        12, SearchStrategy::TPE, 4);
    for (const auto& t : r.trials) {
        if (t.index % 2 == 0) {
            CHECK(std::isnan(t.val_rmse));
            CHECK_FALSE(t.error.empty());
        }
    }
    CHECK(r.best_trial % 2 == 1);
    CHECK_THROWS_AS(search(space, [](int, const Hyperparameters&) -> double { throw Error(ErrorKind::Training, "x"); },
                           4, SearchStrategy::Random, 1),
                    Error);
}

TEST_CASE("search: TPE beats random search on a smooth objective") {
    const auto space = toy_space();
    auto obj = [](int, const Hyperparameters& p) { return toy_loss(p); };
    double tpe = 0.0, rnd = 0.0;
    for (std::uint64_t s = 0; s < 12; ++s) {
        tpe += search(space, obj, 60, SearchStrategy::TPE, s).best_rmse;
        rnd += search(space, obj, 60, SearchStrategy::Random, s).best_rmse;
    }
    MESSAGE("mean best loss: tpe " << tpe / 12 << ", random " << rnd / 12);
    CHECK(tpe < rnd);
}

TEST_CASE("search: default spaces are valid and cover the documented ranges") {
    for (Family f : kAllFamilies) CHECK_NOTHROW(default_space(f).validate());
    HyperSpace bad{{{"a", 2.0, 1.0, ParamScale::Linear}}};
    CHECK_THROWS_AS(bad.validate(), Error);
    HyperSpace neg_log{{{"a", -1.0, 1.0, ParamScale::Log}}};
    CHECK_THROWS_AS(neg_log.validate(), Error);
    for (Family f : kAllFamilies) {
        for (const auto& p : default_space(f).params) {
            if (p.name == "max_depth") {
                CHECK(p.lo == 1.0);
                CHECK(p.hi == 10.0);
            }
        }
    }
}

TEST_CASE("search_family returns the winning trial's model") {
    const auto x = testutil::random_features(300, 21);
    const auto y = testutil::smooth_target(x);
    const auto xv = testutil::random_features(80, 22);
    const auto yv = testutil::smooth_target(xv);
    const auto fs = search_family(Family::ExtraTrees, HyperSpace{{{"n_trees", 5, 20, ParamScale::Integer}}}, x, y, xv,
                                  yv, 4, SearchStrategy::TPE, 9);
    CHECK(testutil::rmse(predict(fs.best_model, xv), yv) == doctest::Approx(fs.result.best_rmse).epsilon(1e-12));
    CHECK(fs.best_model.hyperparameters.at("n_trees") == fs.result.best_params.at("n_trees"));
}

TEST_CASE("metrics") {
    const std::vector<double> y{1.0, 2.0, 4.0, 7.0};
    const auto perfect = metrics(y, y);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.r2 == 1.0);
    CHECK(perfect.dev == 0.0);

    const std::vector<double> mean(4, 3.5);
    CHECK(metrics(y, mean).r2 == doctest::Approx(0.0));

    const std::vector<double> p{1.5, 1.5, 5.0, 6.0};
    const auto m = metrics(y, p);
    CHECK(m.mae == doctest::Approx((0.5 + 0.5 + 1.0 + 1.0) / 4.0));
    CHECK(m.mse == doctest::Approx((0.25 + 0.25 + 1.0 + 1.0) / 4.0));
    CHECK(m.rmse == doctest::Approx(std::sqrt(m.mse)));
    const double sst = 2.5 * 2.5 + 1.5 * 1.5 + 0.5 * 0.5 + 3.5 * 3.5;
    CHECK(m.r2 == doctest::Approx(1.0 - 2.5 / sst));
    CHECK(m.dev == doctest::Approx(std::pow(10.0, m.rmse) - 1.0));

    CHECK(deviation(0.21) == doctest::Approx(0.6218).epsilon(1e-4));
    const std::vector<double> flat(4, 2.0);
    CHECK(std::isnan(metrics(flat, p).r2));
    try {
        r_squared(flat, p);
        FAIL("expected a metric error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Metric);
    }
}

TEST_CASE("k-fold plans partition the rows") {
    std::vector<std::string> ids;
    for (int i = 0; i < 40000; ++i) ids.push_back("s" + std::to_string(i % 20));
    const auto plans = plan_kfold(ids, 10, 0.1, 3);
    REQUIRE(plans.size() == 10);
    const auto test0 = plans[0].rows(Role::Test);
    CHECK(test0.size() == 4000);
    std::set<std::size_t> all_val;
    for (const auto& p : plans) {
        CHECK(p.kind == PlanKind::KFold);
        CHECK(p.rows(Role::Test) == test0);
        CHECK(p.rows(Role::Validation).size() == 3600);
        CHECK(p.rows(Role::Train).size() == 32400);
        CHECK(p.roles.size() == ids.size());
        for (auto r : p.rows(Role::Validation)) CHECK(all_val.insert(r).second);
    }
    CHECK(all_val.size() == 36000);
    CHECK(plans[3].id == "kfold_03");
    const auto again = plan_kfold(ids, 10, 0.1, 3);
    for (std::size_t i = 0; i < plans.size(); ++i) CHECK(again[i].roles == plans[i].roles);

    // Every validation fold and the test set hold each system in proportion.
    for (const auto& p : plans) {
        std::map<std::string, int> per;
        for (auto r : p.rows(Role::Validation)) ++per[ids[r]];
        CHECK(per.size() == 20);
        for (const auto& [id, c] : per) CHECK(std::abs(c - 180) <= 1);
    }
    std::map<std::string, int> per_test;
    for (auto r : test0) ++per_test[ids[r]];
    CHECK(per_test.size() == 20);
    for (const auto& [id, c] : per_test) CHECK(std::abs(c - 200) <= 1);

    std::vector<std::string> tiny{"a", "b", "a"};
    CHECK_THROWS_AS(plan_kfold(tiny, 10, 0.1, 1), Error);
}

TEST_CASE("leave-one-system-out plans") {
    std::vector<std::string> ids;
    for (int s = 0; s < 20; ++s) {
        for (int i = 0; i < 951; ++i) ids.push_back("sys" + std::to_string(s));
    }
    const auto plans = plan_loo(ids, 4);
    REQUIRE(plans.size() == 20);
    for (const auto& p : plans) {
        const auto te = p.rows(Role::Test), tr = p.rows(Role::Train), va = p.rows(Role::Validation);
        CHECK(te.size() == 951);
        for (auto r : te) CHECK(ids[r] == p.group);
        for (auto r : tr) CHECK(ids[r] != p.group);
        for (auto r : va) CHECK(ids[r] != p.group);
        CHECK(std::abs(static_cast<double>(tr.size()) - 19.0 * static_cast<double>(va.size())) <= 20.0);
        CHECK(tr.size() + va.size() + te.size() == ids.size());
        CHECK(p.id == "loo_" + p.group);
    }
    std::vector<std::string> single(10, "only");
    CHECK_THROWS_AS(plan_loo(single, 1), Error);
}

TEST_CASE("benchmark is deterministic and ordered") {
    const auto records = toy_records(4, 40);
    const auto ids = system_ids_of(records);
    auto plans = plan_kfold(ids, 3, 0.2, 1);
    auto loo = plan_loo(ids, 1);
    plans.insert(plans.end(), loo.begin(), loo.end());
    BenchmarkOptions opt;
    opt.families = {Family::Ridge, Family::XGB};
    opt.budget = 2;
    opt.spaces[Family::XGB] = HyperSpace{{{"n_trees", 5, 30, ParamScale::Integer}}};
    opt.seed = 5;
    std::size_t calls = 0;
    const auto a = benchmark(records, plans, opt, [&](const BenchmarkCell&) { ++calls; });
    CHECK(calls == plans.size() * 2);
    REQUIRE(a.cells.size() == plans.size() * 2);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].plan_id == plans[i / 2].id);
        CHECK(a.cells[i].family == opt.families[i % 2]);
    }
    const auto b = benchmark(records, plans, opt);
    CHECK(bench_to_json(a) == bench_to_json(b));
    CHECK(deviations_to_csv(a).rfind("family,plan_kind,plan_id,test_rmse,test_dev\n", 0) == 0);
    const auto summary = summarize(a);
    CHECK(summary.at(PlanKind::KFold).at(Family::Ridge).n_plans == 3);
    CHECK(summary.at(PlanKind::LeaveOneSystemOut).at(Family::XGB).n_plans == 4);
}
