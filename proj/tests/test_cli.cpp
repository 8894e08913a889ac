#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "app.hpp"
#include "config.hpp"

using namespace loopcool;
using namespace loopcool::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "loopcool_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string strip_timestamps(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (line.find("timestamp") == std::string::npos) out += line + "\n";
    return out;
}

std::vector<std::string> body_lines(const std::string& csv) {
    std::istringstream in(csv);
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    return rows;
}

std::vector<std::string> cells(const std::string& row) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : row) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

int column(const std::string& header, const std::string& name) {
    const auto h = cells(header);
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] == name) return static_cast<int>(i);
    return -1;
}

}  // namespace

TEST_CASE("numbers accept pi expressions", "[cli]") {
    CHECK(parse_number("0.25") == 0.25);
    CHECK(parse_number("1e-5") == 1e-5);
    CHECK(parse_number("pi") == pi);
    CHECK(parse_number("-pi") == -pi);
    CHECK(parse_number("2pi") == 2 * pi);
    CHECK(parse_number("pi/2") == pi / 2);
    CHECK(parse_number("3*pi/2") == 3 * pi / 2);
    CHECK_THROWS_AS(parse_number("abc"), ConfigError);
    CHECK_THROWS_AS(parse_number(""), ConfigError);
    CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
    CHECK(parse_list("1, 2,pi") == std::vector<double>{1, 2, pi});
}

TEST_CASE("config grammar", "[cli]") {
    Config cfg;
    cfg.merge_text("# comment\n[system]\nkappa = 0.3  # trailing\n\nn_mech=3\n[drive]\ng_lin = 0.1, 0.2, 0.3\n", "a.cfg");
    const auto r = resolve(cfg);
    CHECK(r.spec.kappa == 0.3);
    CHECK(r.spec.n_mech == 3);
    CHECK(r.spec.g_lin() == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(r.spec.omega_m == std::vector<double>{1, 1, 1});
    CHECK(r.spec.eta.size() == 2);
    CHECK(cfg.at("system.kappa").origin == "a.cfg:3");
}

TEST_CASE("config errors carry locations", "[cli]") {
    Config cfg;
    CHECK_THROWS_WITH(cfg.merge_text("[system]\nkappa 0.2\n", "x.cfg"), ContainsSubstring("x.cfg:2"));
    CHECK_THROWS_WITH(cfg.merge_text("[system]\nfoo = 1\n", "x.cfg"), ContainsSubstring("system.foo"));
    CHECK_THROWS_WITH(cfg.merge_text("[system\n", "x.cfg"), ContainsSubstring("x.cfg:1"));

    Config bad;
    bad.merge_text("[system]\ngamma = 1, 2, 3\n", "y.cfg");
    CHECK_THROWS_WITH(resolve(bad), ContainsSubstring("y.cfg:2"));

    Config neg;
    neg.merge_text("[system]\nkappa = -1\n", "z.cfg");
    CHECK_THROWS_AS(resolve(neg), ConfigError);

    Config mixed;
    mixed.merge_text("[drive]\nmode = physical\ng_lin = 0.1\n", "m.cfg");
    CHECK_THROWS_AS(resolve(mixed), ConfigError);
}

TEST_CASE("parameter paths", "[cli]") {
    SystemSpec s = uniform_spec(3, 1.0, 0.1, 0.2, 1e-5, 1e3, 0.05, {0, 0});
    apply_parameter(s, "omega_m[2]", 1.3);
    CHECK(s.omega_m == std::vector<double>{1, 1.3, 1});
    apply_parameter(s, "theta", -pi / 2);
    CHECK_THAT(s.theta[1], WithinAbs(3 * pi / 2, 1e-15));
    apply_parameter(s, "g_lin[3]", 0.2);
    CHECK(s.g_lin()[2] == 0.2);
    apply_parameter(s, "delta", 0.8);
    CHECK(s.delta() == 0.8);
    CHECK_THROWS_AS(apply_parameter(s, "theta[3]", 1), ConfigError);
    CHECK_THROWS_AS(apply_parameter(s, "kappa[1]", 1), ConfigError);
    CHECK_THROWS_AS(apply_parameter(s, "delta_c", 1), ConfigError);
    CHECK_THROWS_AS(apply_parameter(s, "bogus", 1), ConfigError);
}

TEST_CASE("every preset resolves", "[cli]") {
    for (const auto& [name, text] : presets()) {
        Config cfg;
        cfg.merge_text(text, name);
        CHECK_NOTHROW(resolve(cfg));
    }
}

TEST_CASE("cool at the reference point", "[cli]") {
    const auto r = invoke({"cool", "--preset", "fig2"});
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(r.out);
    CHECK(j["stable"] == true);
    CHECK(j["n_f"][0].get<double>() < 1);
    CHECK(j["n_f"][1].get<double>() < 1);
    CHECK(j["provenance"]["version"] == tool_version);
    CHECK(j["provenance"]["approximation"]["optomechanical"] == "full");
    CHECK(j["provenance"]["approximation"]["mechanical"] == "rwa");
    CHECK(j.contains("limits"));
    CHECK(j["system"]["kappa"] == 0.2);
}

TEST_CASE("cool without loop coupling hits the ceiling", "[cli]") {
    const auto r = invoke({"cool", "--preset", "fig2", "--set", "system.eta=0"});
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(r.out);
    CHECK_THAT(j["n_f"][0].get<double>(), WithinRel(500.0, 0.05));
}

TEST_CASE("cool reports instability with exit 3", "[cli]") {
    const auto r = invoke({"cool", "--set", "drive.delta=-1"});
    CHECK(r.code == exit_unstable);
    const auto j = json::parse(r.out);
    CHECK(j["stable"] == false);
    CHECK(j["n_f"][0].is_null());
}

TEST_CASE("configuration errors exit 2", "[cli]") {
    const auto path = scratch("bad.cfg");
    write(path, "[system]\nkappa = 0.2\ngamma = oops\n");
    const auto r = invoke({"cool", "--config", path.string()});
    CHECK(r.code == exit_config);
    CHECK_THAT(r.err, ContainsSubstring("bad.cfg:3"));
    CHECK(invoke({"cool", "--preset", "nope"}).code == exit_config);
    CHECK(invoke({"cool", "--config", scratch("missing.cfg").string()}).code == exit_config);
    CHECK(invoke({"cool", "--set", "novalue"}).code == exit_config);
    CHECK(invoke({"frobnicate"}).code == exit_config);
    CHECK(invoke({"cool", "--om-rwa", "--om-full"}).code == exit_config);
    CHECK(invoke({"sweep"}).code == exit_config);
}

TEST_CASE("approximation flags", "[cli]") {
    const auto r = invoke({"cool", "--preset", "fig2", "--om-rwa", "--mech-full"});
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(r.out);
    CHECK(j["provenance"]["approximation"]["optomechanical"] == "rwa");
    CHECK(j["provenance"]["approximation"]["mechanical"] == "full");
}

TEST_CASE("help and version", "[cli]") {
    const auto h = invoke({"--help"});
    CHECK(h.code == 0);
    CHECK_THAT(h.out, ContainsSubstring("sweep"));
    CHECK(invoke({"sweep", "--help"}).code == 0);
    const auto v = invoke({"--version"});
    CHECK(v.code == 0);
    CHECK_THAT(v.out, ContainsSubstring(tool_version));
}

TEST_CASE("theta sweep places the valleys on opposite half-periods", "[cli]") {
    const auto r = invoke({"sweep", "--preset", "fig2"});
    REQUIRE(r.code == exit_ok);
    const auto rows = body_lines(r.out);
    const int th = column(rows[0], "theta"), c1 = column(rows[0], "n1"), c2 = column(rows[0], "n2");
    REQUIRE(c1 > 0);
    double best1 = 1e300, best2 = 1e300, at1 = 0, at2 = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto c = cells(rows[i]);
        const double t = std::stod(c[th]), a = std::stod(c[c1]), b = std::stod(c[c2]);
        if (a < best1) best1 = a, at1 = t;
        if (b < best2) best2 = b, at2 = t;
    }
    CHECK(at1 > 0);
    CHECK(at1 < pi);
    CHECK(at2 > pi);
    CHECK(at2 < 2 * pi);
    CHECK_THAT(r.out, ContainsSubstring("# system.kappa: 0.2"));
    CHECK_THAT(r.out, ContainsSubstring("# approx.mechanical: rwa"));
}

TEST_CASE("frequency-ratio sweep peaks in the degenerate window", "[cli]") {
    const auto r = invoke({"sweep", "--preset", "figS1", "--set", "system.eta=0", "--set",
                           "sweep.axis1=omega_m[2], 0.9, 1.1, 21"});
    REQUIRE(r.code == exit_ok);
    const auto rows = body_lines(r.out);
    const int ax = column(rows[0], "omega_m[2]"), c1 = column(rows[0], "n1");
    double peak = 0, at = 0, edge = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto c = cells(rows[i]);
        const double v = std::stod(c[c1]);
        if (v > peak) peak = v, at = std::stod(c[ax]);
        if (i == 1) edge = v;
    }
    CHECK_THAT(at, WithinAbs(1.0, 1e-12));
    CHECK(peak > 400);
    CHECK(edge < 0.1 * peak);
}

TEST_CASE("two-axis sweep keeps axis order", "[cli]") {
    const auto r = invoke({"sweep", "--preset", "fig2", "--set", "sweep.axis1=eta, 0.02, 0.06, 3", "--set",
                           "sweep.axis2=theta, 0, pi, 3"});
    REQUIRE(r.code == exit_ok);
    const auto rows = body_lines(r.out);
    REQUIRE(rows.size() == 10);
    CHECK(cells(rows[1])[0] == "0.02");
    CHECK(cells(rows[2])[0] == "0.02");
    CHECK(cells(rows[2])[1] == format_double(pi / 2));
    CHECK(cells(rows[4])[0] == "0.04");
}

TEST_CASE("unstable sweep rows have empty observables", "[cli]") {
    const auto r = invoke({"sweep", "--preset", "fig2", "--set", "sweep.axis1=delta, -1, 1, 3"});
    REQUIRE(r.code == exit_ok);
    const auto rows = body_lines(r.out);
    const int c1 = column(rows[0], "n1"), st = column(rows[0], "stable");
    const auto first = cells(rows[1]);
    CHECK(first[c1].empty());
    CHECK(first[st] == "false");
    const auto last = cells(rows[3]);
    CHECK_FALSE(last[c1].empty());
    CHECK(last[st] == "true");
}

TEST_CASE("sweep file, output file and determinism", "[cli]") {
    const auto sweep = scratch("s.cfg");
    write(sweep, "[sweep]\naxis1 = theta, 0, 2pi, 9\noutputs = n_f, stable, lambda_rel, limits, darkness\n");
    const auto out1 = scratch("serial.csv"), out2 = scratch("parallel.csv");
    REQUIRE(invoke({"sweep", "--preset", "fig2", "--sweep", sweep.string(), "--out", out1.string()}).code == 0);
    REQUIRE(invoke({"sweep", "--preset", "fig2", "--sweep", sweep.string(), "--out", out2.string(), "--workers", "3"})
                .code == 0);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string a = slurp(out1), b = slurp(out2);
    CHECK(strip_timestamps(a) == strip_timestamps(b));
    CHECK_THAT(a, ContainsSubstring("lambda_b2b1"));
    CHECK_THAT(a, ContainsSubstring("darkness"));
    CHECK_THAT(a, ContainsSubstring("n1_simplified"));
    CHECK_FALSE(std::filesystem::exists(out1.string() + ".partial"));
}

TEST_CASE("failed sweep leaves no partial output", "[cli]") {
    const auto out = scratch("fail.csv");
    std::filesystem::remove(out);
    const auto r = invoke({"sweep", "--preset", "fig2", "--set", "sweep.axis1=kappa, -1, 1, 3", "--out", out.string()});
    CHECK(r.code == exit_config);
    CHECK_FALSE(std::filesystem::exists(out));
    CHECK_FALSE(std::filesystem::exists(out.string() + ".partial"));
}

TEST_CASE("spectrum scan", "[cli]") {
    const auto r = invoke({"spectrum", "--preset", "figS6", "--points", "201"});
    REQUIRE(r.code == exit_ok);
    const auto rows = body_lines(r.out);
    REQUIRE(rows.size() == 202);
    const int l = column(rows[0], "lambda_b2b1"), la = column(rows[0], "lambda_analytic");
    CHECK(column(rows[0], "T_b2_b1") > 0);
    const auto mid = cells(rows[101]);
    CHECK(mid[0] == "1");
    CHECK_THAT(std::stod(mid[l]), WithinAbs(1.0, 0.05));
    CHECK(mid[la] == "1");
    CHECK_THAT(r.out, ContainsSubstring("# normalizer:"));

    const auto flat = invoke({"spectrum", "--preset", "figS6", "--points", "21", "--set", "system.theta=0"});
    for (std::size_t i = 1; i < body_lines(flat.out).size(); ++i)
        CHECK(std::abs(std::stod(cells(body_lines(flat.out)[i])[l])) <= 1e-6);

    CHECK(invoke({"spectrum", "--points", "1"}).code == exit_config);
    CHECK(invoke({"spectrum", "--set", "drive.delta=-1"}).code == exit_unstable);
}

TEST_CASE("modes report", "[cli]") {
    const auto r = invoke({"modes", "--set", "system.n_mech=4", "--set", "system.eta=0.1"});
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(r.out);
    CHECK(j["normal_modes"]["dark_count"] == 2);
    CHECK_THAT(j["predicted_uncooled"].get<double>(), WithinRel(750.0, 1e-12));

    const auto p = json::parse(invoke({"modes", "--set", "system.eta=0.05", "--set", "system.theta=pi", "--set",
                                       "drive.g_lin=0.1, 0.03"})
                                   .out);
    CHECK(p["hybrid"]["darkness"].get<double>() > 0.1);

    const auto q = json::parse(invoke({"modes", "--set", "system.eta=0.05", "--set", "system.theta=pi/2"}).out);
    CHECK(q["hybrid"]["darkness"].get<double>() > 0.5);
    CHECK(q["bright_dark"].is_null());

    const auto bd = json::parse(invoke({"modes"}).out);
    CHECK(bd["bright_dark"]["dark_mode_exists"] == true);
}

TEST_CASE("lambda report", "[cli]") {
    const auto r = invoke({"lambda", "--eta", "1", "--theta", "0"});
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(r.out);
    auto l = j["eigen"]["lambdas"].get<std::vector<double>>();
    std::sort(l.begin(), l.end());
    CHECK_THAT(l[0], WithinAbs(-1, 1e-7));
    CHECK_THAT(l[1], WithinAbs(-1, 1e-7));
    CHECK_THAT(l[2], WithinAbs(2, 1e-12));
    CHECK_FALSE(j["eigen"]["dark_index"].is_null());

    const auto scan = json::parse(invoke({"lambda", "--preset", "lambda", "--theta-points", "9"}).out);
    REQUIRE(scan["theta_scan"].size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        const auto pe = scan["theta_scan"][i]["p_e"].get<std::vector<double>>();
        const double low = *std::min_element(pe.begin(), pe.end());
        if (i % 4 == 0)
            CHECK(low <= 1e-10);
        else
            CHECK(low > 1e-4);
    }

    const auto bare = json::parse(invoke({"lambda", "--eta", "0"}).out);
    CHECK_FALSE(bare["eigen"]["dark_index"].is_null());
}

TEST_CASE("limits and stability reports", "[cli]") {
    const auto l = invoke({"limits", "--preset", "fig4"});
    REQUIRE(l.code == exit_ok);
    const auto j = json::parse(l.out);
    CHECK(j["simplified"]["xi_form"] == "resonant");
    CHECK(j["full"]["xi_form"] == "lorentzian");
    CHECK(j["exact"]["stable"] == true);
    CHECK(invoke({"limits", "--set", "system.n_mech=3"}).code == exit_config);

    const auto s = invoke({"stability", "--preset", "fig2"});
    REQUIRE(s.code == exit_ok);
    const auto k = json::parse(s.out);
    CHECK(k["eigenvalues"].size() == 6);
    CHECK(k["spectral_abscissa"].get<double>() < 0);
    CHECK(invoke({"stability", "--set", "drive.delta=-1"}).code == exit_unstable);
}

TEST_CASE("physical drive through the CLI", "[cli]") {
    const auto r = invoke({"cool", "--set", "drive.mode=physical", "--set", "drive.omega_re=0.5", "--set",
                           "drive.g_single=1e-3", "--set", "system.gamma=1e-3", "--set", "system.nbar=10"});
    REQUIRE(r.code == exit_ok);
    const auto j = json::parse(r.out);
    CHECK(j["system"]["drive"]["mode"] == "physical");
    CHECK(j["n_f"][0].get<double>() < 10);
}

TEST_CASE("repeated runs are identical apart from the timestamp", "[cli]") {
    for (const auto& args : std::vector<std::vector<std::string>>{{"cool", "--preset", "fig2"},
                                                                  {"modes", "--preset", "figS11"},
                                                                  {"spectrum", "--points", "11"}}) {
        CHECK(strip_timestamps(invoke(args).out) == strip_timestamps(invoke(args).out));
    }
}

TEST_CASE("installed binary runs end to end", "[cli]") {
    const auto out = scratch("bin.json");
    std::filesystem::remove(out);
    const std::string cmd = std::string(LOOPCOOL_CLI_PATH) + " cool --preset fig2 --out " + out.string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream in(out);
    const auto j = json::parse(in);
    CHECK(j["stable"] == true);
    const std::string bad = std::string(LOOPCOOL_CLI_PATH) + " cool --set system.kappa=x 2>/dev/null";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == exit_config);
}

TEST_CASE("format_double", "[cli]") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-5) == "1e-05");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(std::stod(format_double(pi)) == pi);
}
