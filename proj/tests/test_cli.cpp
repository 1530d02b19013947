#include "doctest.h"
#include "relnet/network_io.hpp"
#include "support/cli_runner.hpp"
#include "support/fixtures.hpp"

using namespace relnet;

namespace {

std::string put(const std::string& name, const Json& doc) {
    const auto path = cli::scratch() / name;
    cli::write_file(path, doc.dump(2));
    return path.string();
}

std::string put_net(const std::string& name, const BeliefNetwork& net) { return put(name, network_to_json(net)); }

std::set<std::string> as_set(const Json& arr) {
    std::set<std::string> out;
    for (const auto& x : arr) out.insert(x.get<std::string>());
    return out;
}

double max_gap(const Json& a, const Json& b) {
    double worst = 0.0;
    for (const auto& [node, dist] : a.items()) {
        for (const auto& [state, p] : dist.items())
            worst = std::max(worst, std::abs(p.get<double>() - b.at(node).at(state).get<double>()));
    }
    return worst;
}

}  // namespace

TEST_CASE("validate") {
    std::mt19937_64 rng(1);
    const auto net = put_net("pair.json", fixtures::with_parents({{}, {0}}, rng));
    const auto ok = cli::run({"validate", "--network", net});
    CHECK(ok.exit == 0);
    const Json doc = Json::parse(ok.out);
    CHECK(doc.at("ok") == true);
    CHECK(doc.at("nodes") == 2);

    const auto bad = put("bad.json", Json::parse(R"({"name":"x","nodes":[
        {"id":"a","states":["0","1"],"parents":[],"cpt":[0.5,0.6]}]})"));
    const auto r = cli::run({"validate", "--network", bad});
    CHECK(r.exit == 3);
    CHECK(Json::parse(r.out).at("ok") == false);

    const auto cyclic = put("cyclic.json", Json::parse(R"({"name":"x","nodes":[
        {"id":"a","states":["0","1"],"parents":["b"],"cpt":[0.5,0.5,0.5,0.5]},
        {"id":"b","states":["0","1"],"parents":["a"],"cpt":[0.5,0.5,0.5,0.5]}]})"));
    CHECK(cli::run({"validate", "--network", cyclic}).exit == 3);

    const auto garbage = cli::scratch() / "garbage.json";
    cli::write_file(garbage, "{not json");
    CHECK(cli::run({"validate", "--network", garbage.string()}).exit == 2);
    CHECK(cli::run({"validate", "--network", (cli::scratch() / "missing.json").string()}).exit == 2);
}

TEST_CASE("infer: both engines agree and targets default to unobserved nodes") {
    const BeliefNetwork f1 = fixtures::figure1();
    const auto net = put_net("fig1.json", f1);
    const auto ev = put("fig1_ev.json", Json{{"d", "d1"}, {"f", "f0"}});
    const auto jt = cli::run({"infer", "--network", net, "--evidence", ev});
    const auto en = cli::run({"infer", "--network", net, "--evidence", ev, "--engine", "enum"});
    REQUIRE(jt.exit == 0);
    REQUIRE(en.exit == 0);
    const Json a = Json::parse(jt.out);
    const Json b = Json::parse(en.out);
    CHECK(a.at("posteriors").size() == 6);
    CHECK_FALSE(a.at("posteriors").contains("d"));
    CHECK(max_gap(a.at("posteriors"), b.at("posteriors")) <= 1e-9);
    CHECK(std::abs(a.at("log_p_evidence").get<double>() - b.at("log_p_evidence").get<double>()) <= 1e-9);

    const auto some = cli::run({"infer", "--network", net, "--evidence", ev, "--targets", "g,a"});
    REQUIRE(some.exit == 0);
    const Json s = Json::parse(some.out).at("posteriors");
    CHECK(s.size() == 2);
    CHECK(max_gap(s, a.at("posteriors")) <= 1e-12);

    const auto out = cli::scratch() / "post.json";
    CHECK(cli::run({"infer", "--network", net, "--evidence", ev, "--out", out.string()}).exit == 0);
    CHECK(Json::parse(cli::slurp(out)) == a);
}

TEST_CASE("infer: error exits") {
    const auto net = put_net("fig1.json", fixtures::figure1());
    CHECK(cli::run({"infer", "--network", net, "--targets", "zz"}).exit == 3);
    CHECK(cli::run({"infer", "--network", net, "--evidence", put("e1.json", Json{{"d", "nope"}})}).exit == 3);
    CHECK(cli::run({"infer", "--network", net, "--evidence", put("e2.json", Json{{"d", "d1"}}), "--targets", "d"})
              .exit == 3);
    CHECK(cli::run({"infer", "--network", net, "--engine", "bogus"}).exit == 64);
    CHECK(cli::run({"infer"}).exit == 64);
    CHECK(cli::run({}).exit == 64);

    const BeliefNetwork det = NetworkBuilder()
                                  .node("a", {"0", "1"}, {}, {1.0, 0.0})
                                  .node("b", {"0", "1"}, {"a"}, {1.0, 0.0, 0.0, 1.0})
                                  .build();
    const auto dnet = put_net("det.json", det);
    CHECK(cli::run({"infer", "--network", dnet, "--evidence", put("det_ev.json", Json{{"b", "1"}})}).exit == 4);

    NetworkBuilder wide("wide");
    for (int i = 0; i < 25; ++i) wide.node("w" + std::to_string(i), {"0", "1"}, {}, {0.5, 0.5});
    const auto wnet = put_net("wide.json", wide.build());
    CHECK(cli::run({"infer", "--network", wnet, "--engine", "enum"}).exit == 6);
    CHECK(cli::run({"infer", "--network", wnet}).exit == 0);
}

TEST_CASE("prune on Figure 1") {
    const auto net = put_net("fig1.json", fixtures::figure1());
    const auto ev = put("fig1_ev.json", Json{{"d", "d1"}, {"f", "f0"}});
    const auto r = cli::run({"prune", "--network", net, "--evidence", ev, "--targets", "b,e"});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    const Json& t = doc.at("trace");
    CHECK(as_set(t.at("removed_barren")) == std::set<std::string>{"g", "h"});
    CHECK(as_set(t.at("absorbed_evidence")) == std::set<std::string>{"d", "f"});
    CHECK(as_set(t.at("surviving")) == std::set<std::string>{"a", "b", "c", "e"});
    CHECK(as_set(doc.at("targets")) == std::set<std::string>{"b", "e"});
    // The reduced network is itself a valid input.
    const auto sub = put("fig1_sub.json", doc.at("network"));
    CHECK(cli::run({"validate", "--network", sub}).exit == 0);
}

TEST_CASE("prune with nuisance removal on Figure 3") {
    const auto net = put_net("fig3.json", fixtures::figure3());
    const auto ev = put("fig3_ev.json", Json{{"d", "d1"}});
    const auto r = cli::run({"prune", "--network", net, "--evidence", ev, "--targets", "e", "--nuisance"});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    CHECK(as_set(doc.at("trace").at("removed_nuisance")) == std::set<std::string>{"a", "b", "f"});
    std::set<std::string> anchors;
    for (const auto& g : doc.at("nuisance_graphs")) {
        anchors.insert(g.at("anchor").get<std::string>());
        CHECK(g.at("is_tree") == true);
    }
    CHECK(anchors == std::set<std::string>{"c", "e"});

    const auto plain = cli::run({"prune", "--network", net, "--evidence", ev, "--targets", "e"});
    CHECK(Json::parse(plain.out).at("trace").at("removed_nuisance").empty());
}

TEST_CASE("prune without evidence over every node returns the input") {
    const BeliefNetwork f1 = fixtures::figure1();
    const auto net = put_net("fig1.json", f1);
    const auto r = cli::run({"prune", "--network", net});
    REQUIRE(r.exit == 0);
    const Json doc = Json::parse(r.out);
    CHECK(doc.at("network").at("nodes") == network_to_json(f1).at("nodes"));
    CHECK(doc.at("trace").at("surviving").size() == f1.size());
}

TEST_CASE("decompose matches infer and is reproducible") {
    const auto net = put_net("fig5.json", fixtures::figure5());
    const auto ev = put("fig5_ev.json", Json{{"d", "d0"}});
    const auto d1 = cli::run({"decompose", "--network", net, "--evidence", ev, "--no-timing"});
    const auto d2 = cli::run({"decompose", "--network", net, "--evidence", ev, "--no-timing", "--threads", "3"});
    const auto inf = cli::run({"infer", "--network", net, "--evidence", ev});
    REQUIRE(d1.exit == 0);
    REQUIRE(d2.exit == 0);
    CHECK(d1.out == d2.out);
    const Json doc = Json::parse(d1.out);
    CHECK(doc.at("posteriors").size() == 8);
    CHECK(max_gap(Json::parse(inf.out).at("posteriors"), doc.at("posteriors")) <= 1e-9);
    CHECK(doc.at("posteriors").at("d").at("d0") == 1.0);
    for (const auto& s : doc.at("steps")) {
        CHECK_FALSE(s.contains("millis"));
        CHECK(s.at("subnetwork_size") == s.at("subnetwork").size());
    }
    const auto timed = cli::run({"decompose", "--network", net, "--evidence", ev});
    CHECK(Json::parse(timed.out).at("steps").at(0).contains("millis"));

    std::mt19937_64 rng(9);
    const auto one = put_net("one.json", fixtures::with_parents({{}}, rng));
    const auto single = cli::run({"decompose", "--network", one});
    REQUIRE(single.exit == 0);
    CHECK(Json::parse(single.out).at("steps").size() == 1);
}

TEST_CASE("gen") {
    const auto a = cli::run({"gen", "--nodes", "20", "--max-parents", "3", "--seed", "5"});
    const auto b = cli::run({"gen", "--nodes", "20", "--max-parents", "3", "--seed", "5"});
    REQUIRE(a.exit == 0);
    CHECK(a.out == b.out);
    const BeliefNetwork net = network_from_json(Json::parse(a.out));
    CHECK(net.size() == 20);
    const auto path = put("gen20.json", Json::parse(a.out));
    CHECK(cli::run({"validate", "--network", path}).exit == 0);

    const auto ev = cli::run({"gen", "--network", path, "--evidence", "2", "--seed", "3"});
    REQUIRE(ev.exit == 0);
    const Json e = Json::parse(ev.out);
    CHECK(e.size() == 2);
    CHECK(evidence_from_json(e, net).size() == 2);
    CHECK(cli::run({"gen", "--nodes", "0"}).exit != 0);
}

TEST_CASE("bench") {
    const auto tiny = cli::run({"bench", "--nodes", "15", "--max-parents", "2", "--density", "0.3", "--cases", "1",
                                "--k", "2", "--csv", (cli::scratch() / "bench.csv").string()});
    REQUIRE(tiny.exit == 0);
    CHECK(tiny.out.find("Dec+NuisRem") != std::string::npos);
    CHECK(tiny.out.find("n = 1") != std::string::npos);
    const std::string csv = cli::slurp(cli::scratch() / "bench.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);

    const auto strict =
        cli::run({"bench", "--nodes", "10", "--cases", "1", "--k", "1", "--seed", "7", "--tolerance", "-1"});
    CHECK(strict.exit == 5);
    CHECK(strict.err.find("7") != std::string::npos);
}
