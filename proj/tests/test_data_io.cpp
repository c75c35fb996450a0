#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "glider/data_io.hpp"

using namespace glider;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "gliderwatch_io_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("projection maps the origin to zero and inverts exactly") {
    const LocalFrame frame(31.0, -80.5);
    CHECK(frame.project(31.0, -80.5).norm() == 0.0);

    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const double lat = 31.0 + u(gen);
        const double lon = -80.5 + u(gen);
        const auto xy = frame.project(lat, lon);
        double lat2 = 0.0, lon2 = 0.0;
        frame.unproject(xy, lat2, lon2);
        CHECK(std::abs(lat2 - lat) < 1e-9);
        CHECK(std::abs(lon2 - lon) < 1e-9);
    }
}

TEST_CASE("a hundredth of a degree north is about 1105.74 m") {
    const LocalFrame frame(31.0, -80.5);
    const auto xy = frame.project(31.01, -80.5);
    CHECK(xy.y() == doctest::Approx(1105.74).epsilon(1e-12));
    CHECK(xy.x() == 0.0);
}

TEST_CASE("latitudes beyond 85 degrees are rejected") {
    CHECK_THROWS_AS(LocalFrame(86.0, 0.0), DomainError);
    const LocalFrame frame(84.9, 0.0);
    CHECK_THROWS_AS(frame.project(85.5, 0.0), DomainError);
    double lat = 0.0, lon = 0.0;
    CHECK_THROWS_AS(frame.unproject({0.0, 5e7}, lat, lon), DomainError);
}

TEST_CASE("dense files round-trip exactly") {
    TempDir tmp;
    DenseFile file;
    file.header.epoch_utc = "2026-01-01T00:00:00Z";
    file.header.has_origin = true;
    file.header.origin_lat = 31.0;
    file.header.origin_lon = -80.5;
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 200; ++k)
        file.records.push_back(
            {k * 10.0 + 0.123456789, 31.0 + 0.1 * u(gen), -80.5 + 0.1 * u(gen), u(gen)});

    const fs::path p = tmp.path / "dense.csv";
    write_dense(p, file);
    const auto back = read_dense(p);
    REQUIRE(back.records.size() == file.records.size());
    for (std::size_t k = 0; k < file.records.size(); ++k) {
        CHECK(back.records[k].t == file.records[k].t);
        CHECK(back.records[k].lat == file.records[k].lat);
        CHECK(back.records[k].lon == file.records[k].lon);
        CHECK(back.records[k].heading == file.records[k].heading);
    }
    CHECK(back.header.epoch_utc == file.header.epoch_utc);

    // write-read-write is byte-stable.
    const fs::path p2 = tmp.path / "dense2.csv";
    write_dense(p2, back);
    std::ifstream a(p), b(p2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("sparse files round-trip including intra-segment samples") {
    TempDir tmp;
    SparseFile file;
    file.header.epoch_utc = "2026-01-01T00:00:00Z";
    file.header.has_origin = true;
    file.header.origin_lat = 31.0;
    file.header.origin_lon = -80.5;
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 12; ++k) {
        SparseRecord rec;
        rec.segment_start_t = k * 14400.0;
        rec.segment_end_t = (k + 1) * 14400.0;
        rec.start_lat = 31.0 + 0.01 * u(gen);
        rec.start_lon = -80.5 + 0.01 * u(gen);
        rec.end_lat = 31.0 + 0.01 * u(gen);
        rec.end_lon = -80.5 + 0.01 * u(gen);
        rec.mean_heading = u(gen);
        rec.f_m = {0.1 * u(gen), 0.1 * u(gen)};
        if (k % 2 == 0)
            for (int j = 1; j <= 3; ++j)
                rec.samples.push_back({rec.segment_start_t + j * 3600.0,
                                       31.0 + 0.01 * u(gen), -80.5 + 0.01 * u(gen)});
        file.records.push_back(rec);
    }
    const fs::path p = tmp.path / "sparse.csv";
    write_sparse(p, file);
    const auto back = read_sparse(p);
    REQUIRE(back.records.size() == file.records.size());
    for (std::size_t k = 0; k < file.records.size(); ++k) {
        CHECK(back.records[k].segment_start_t == file.records[k].segment_start_t);
        CHECK(back.records[k].f_m == file.records[k].f_m);
        CHECK(back.records[k].mean_heading == file.records[k].mean_heading);
        REQUIRE(back.records[k].samples.size() == file.records[k].samples.size());
        for (std::size_t j = 0; j < file.records[k].samples.size(); ++j) {
            CHECK(back.records[k].samples[j].t == file.records[k].samples[j].t);
            CHECK(back.records[k].samples[j].lat == file.records[k].samples[j].lat);
        }
    }
}

TEST_CASE("series files round-trip exactly") {
    TempDir tmp;
    SeriesFile file;
    file.header.epoch_utc = "2026-01-01T00:00:00Z";
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        EstimateSample s;
        s.t = k * 60.0;
        s.x_meas = {1e3 * u(gen), 1e3 * u(gen)};
        s.x_hat = s.x_meas + Eigen::Vector2d(u(gen), u(gen));
        s.clle = (s.x_meas - s.x_hat).norm();
        s.v_l = 0.2 + 0.02 * u(gen);
        s.f_l = {0.1 * u(gen), 0.1 * u(gen)};
        file.series.samples.push_back(s);
    }
    const fs::path p = tmp.path / "series.csv";
    write_series(p, file);
    const auto back = read_series(p);
    REQUIRE(back.series.size() == file.series.size());
    for (std::size_t k = 0; k < file.series.size(); ++k) {
        CHECK(back.series.samples[k].t == file.series.samples[k].t);
        CHECK(back.series.samples[k].x_meas == file.series.samples[k].x_meas);
        CHECK(back.series.samples[k].x_hat == file.series.samples[k].x_hat);
        CHECK(back.series.samples[k].clle == file.series.samples[k].clle);
        CHECK(back.series.samples[k].v_l == file.series.samples[k].v_l);
        CHECK(back.series.samples[k].f_l == file.series.samples[k].f_l);
    }
}

TEST_CASE("truth files keep injection markers") {
    TempDir tmp;
    TruthFile file;
    file.header.epoch_utc = "2026-01-01T00:00:00Z";
    AnomalyInjection inj;
    inj.kind = AnomalyKind::speed_degradation;
    inj.t_start = 259200.0;
    inj.magnitude = 0.6;
    file.injections.push_back(inj);
    for (int k = 0; k < 10; ++k) {
        file.truth.times.push_back(k * 10.0);
        file.truth.positions.emplace_back(k * 2.0, 0.0);
        file.truth.headings.push_back(0.0);
        file.truth.speeds.push_back(0.2);
        file.truth.flows.emplace_back(0.0, 0.0);
    }
    const fs::path p = tmp.path / "truth.csv";
    write_truth(p, file);
    const auto back = read_truth(p);
    REQUIRE(back.injections.size() == 1);
    CHECK(back.injections[0].kind == AnomalyKind::speed_degradation);
    CHECK(back.injections[0].t_start == 259200.0);
    CHECK(std::isinf(back.injections[0].t_end));
    CHECK(back.truth.size() == 10);
    CHECK(back.truth.positions[3] == Eigen::Vector2d(6.0, 0.0));
}

TEST_CASE("an empty file with a valid header is an empty stream") {
    std::istringstream in("#version glider-dense 1\n#epoch 2026-01-01T00:00:00Z\n");
    const auto file = read_dense_stream(in, "mem");
    CHECK(file.records.empty());
}

TEST_CASE("a missing version header is a parse error") {
    std::istringstream in("0,31,-80,0\n");
    CHECK_THROWS_AS(read_dense_stream(in, "mem"), ParseError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_dense_stream(empty, "mem"), ParseError);
}

TEST_CASE("time running backwards is reported with its line number") {
    std::string text = "#version glider-dense 1\n";
    for (int k = 0; k < 20; ++k) text += std::to_string(k) + ",31,-80,0\n";
    text += "5,31,-80,0\n";  // line 22
    std::istringstream in(text);
    try {
        read_dense_stream(in, "mem");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 22);
        CHECK(std::string(e.what()).find("mem:22") != std::string::npos);
    }
}

TEST_CASE("malformed fields are reported with their line numbers") {
    std::istringstream in("#version glider-dense 1\n0,31,-80,0\n10,31,notanumber,0\n");
    try {
        read_dense_stream(in, "mem");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("comments and blank lines are tolerated anywhere") {
    std::istringstream in(
        "#version glider-dense 1\n\n# a comment\n0,31,-80,0\n\n# mid-stream comment\n"
        "10,31.001,-80,0.1\n\n");
    const auto file = read_dense_stream(in, "mem");
    CHECK(file.records.size() == 2);
}

TEST_CASE("an empty config yields the standard defaults") {
    std::istringstream in("");
    const auto cfg = load_config_stream(in, "mem");
    CHECK(cfg.basis_count == 4);
    CHECK(cfg.basis_sigma == 13e3);
    CHECK(cfg.basis_omega == doctest::Approx(2.0 * std::numbers::pi * 1e-6).epsilon(1e-15));
    CHECK(cfg.basis_phase == 0.0);
    CHECK(cfg.gains_k(0, 0) == 0.003);
    CHECK(cfg.gains_k(1, 1) == 0.003);
    CHECK(cfg.gains_k(0, 1) == 0.0);
    CHECK(cfg.gains_gamma_bar == 5e-7);
    CHECK(cfg.gains_s == 30e-3);
    CHECK(cfg.det_gamma_f == 1.0);
    CHECK(cfg.det_v_min == 0.15);
    CHECK(cfg.det_v_max == 0.25);
}

TEST_CASE("config validation names the offending field") {
    std::istringstream in(
        "#version glider-config 1\ndetection.v_min = 0.3\ndetection.v_max = 0.25\n");
    try {
        load_config_stream(in, "mem");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("v_min") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected") {
    std::istringstream in("#version glider-config 1\nsim.vtrue = 0.2\n");
    CHECK_THROWS_AS(load_config_stream(in, "mem"), ParseError);
}

TEST_CASE("a single-basis override works end to end") {
    std::istringstream in(
        "#version glider-config 1\nbasis.count = 1\nbasis.center.1 = 1000 2000\n"
        "sim.flow.theta.1 = 0.05 -0.02\n");
    const auto cfg = load_config_stream(in, "mem");
    const auto basis = resolved_basis(cfg);
    REQUIRE(basis.size() == 1);
    CHECK(basis.bases[0].center == Eigen::Vector2d(1000.0, 2000.0));
    const auto theta = resolved_theta(cfg, basis);
    CHECK(theta.theta.col(0) == Eigen::Vector2d(0.05, -0.02));
}

TEST_CASE("configs round-trip through write and load") {
    TempDir tmp;
    RunConfig cfg;
    cfg.scenario_id = "roundtrip";
    cfg.sim_duration = 86400.0;
    cfg.sim_seed = 77;
    cfg.basis_sigma = 17e3;
    cfg.gains_gamma_bar = 7e-7;
    cfg.sim_waypoints = {{0.0, 0.0}, {5000.0, 0.0}, {5000.0, 5000.0}};
    cfg.flow_theta_cols = {{0.01, 0.02}, {-0.01, 0.005}, {0.0, 0.0}, {0.02, -0.03}};
    AnomalyInjection inj;
    inj.kind = AnomalyKind::heading_disturbance;
    inj.t_start = 1000.0;
    inj.t_end = 2000.0;
    inj.magnitude = 0.3;
    cfg.injections.push_back(inj);

    const fs::path p = tmp.path / "config.cfg";
    write_config(p, cfg);
    const auto back = load_config(p);
    CHECK(back == cfg);

    // Canonical writer output is stable under a second pass.
    const fs::path p2 = tmp.path / "config2.cfg";
    write_config(p2, back);
    std::ifstream a(p), b(p2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("auto basis grid spans the waypoint bounding box") {
    RunConfig cfg;
    cfg.sim_waypoints = {{0.0, 0.0}, {8000.0, 0.0}, {8000.0, 8000.0}, {0.0, 8000.0}};
    cfg.basis_grid_inset = 0.25;
    const auto basis = resolved_basis(cfg);
    REQUIRE(basis.size() == 4);
    CHECK(basis.bases[0].center == Eigen::Vector2d(2000.0, 2000.0));
    CHECK(basis.bases[3].center == Eigen::Vector2d(6000.0, 6000.0));
}

TEST_CASE("utc timestamps format and parse consistently") {
    const long long epoch = parse_utc("2026-01-01T00:00:00Z");
    CHECK(format_utc(epoch) == "2026-01-01T00:00:00Z");
    CHECK(format_utc(epoch + 3661) == "2026-01-01T01:01:01Z");
    CHECK_THROWS_AS(parse_utc("2026-01-01 00:00:00"), ParseError);
    CHECK_THROWS_AS(parse_utc("garbage"), ParseError);
}

TEST_CASE("doubles survive shortest round-trip formatting") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const double v = u(gen) * std::pow(10.0, static_cast<int>(20 * u(gen)));
        CHECK(parse_double(fmt_double(v), "mem", 0) == v);
    }
    CHECK(std::isinf(parse_double("inf", "mem", 0)));
    CHECK(std::isnan(parse_double("nan", "mem", 0)));
    CHECK(parse_double("-0.5", "mem", 0) == -0.5);
    CHECK_THROWS_AS(parse_double("1.5x", "mem", 0), ParseError);
    CHECK_THROWS_AS(parse_double("", "mem", 0), ParseError);
}

TEST_CASE("parsers survive random bytes with structured errors only") {
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<int> len(0, 512);
    std::uniform_int_distribution<int> byte(0, 255);
    int dense_ok = 0, sparse_ok = 0, config_ok = 0;
    for (int k = 0; k < 2000; ++k) {
        std::string blob(len(gen), '\0');
        for (auto& c : blob) c = static_cast<char>(byte(gen));
        // Half the cases get a valid header to push deeper into the parsers.
        if (k % 2 == 0) blob = "#version glider-dense 1\n" + blob;
        {
            std::istringstream in(blob);
            try {
                read_dense_stream(in, "fuzz");
                ++dense_ok;
            } catch (const ParseError&) {
            }
        }
        {
            std::istringstream in(blob);
            try {
                read_sparse_stream(in, "fuzz");
                ++sparse_ok;
            } catch (const ParseError&) {
            }
        }
        {
            std::istringstream in(blob);
            try {
                load_config_stream(in, "fuzz");
                ++config_ok;
            } catch (const ParseError&) {
            }
        }
    }
    CHECK(dense_ok >= 0);  // reaching here means no crash
}
