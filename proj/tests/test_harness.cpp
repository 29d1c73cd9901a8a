#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "diffint/diffint.hpp"

using namespace diffint;

namespace {

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

SweepSpec small_spec(std::vector<Scheme> schemes, int points) {
  SweepSpec s;
  s.schemes = std::move(schemes);
  s.points = points;
  s.nbar_min = 1e6;
  s.nbar_max = 1e10;
  return s;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DIFFINT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, EmptyGivesDefaults) {
  const Config c = parse_config("");
  const Config d;
  EXPECT_EQ(c.nbar, d.nbar);
  EXPECT_EQ(c.gamma, d.gamma);
  EXPECT_EQ(c.alpha, d.alpha);
  EXPECT_EQ(c.physical.photons, d.physical.photons);
  EXPECT_EQ(c.physical.detuning, d.physical.detuning);
  EXPECT_FALSE(c.chi.has_value());
  EXPECT_EQ(parse_config("# comment only\n\n   \n").seed, d.seed);
}

TEST(Config, NegativeAlphaReportsLine) {
  try {
    parse_config("N_bar = 1e9\n\nalpha = -1\n", {}, "run.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("photons = 1e11\n"), ConfigError);
  EXPECT_THROW(parse_config("n = 1e11\nn = 2e11\n"), ConfigError);
  EXPECT_THROW(parse_config("n\n"), ConfigError);
  EXPECT_THROW(parse_config("n = \n"), ConfigError);
  EXPECT_THROW(parse_config("n = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("n = 1e11x\n"), ConfigError);
  EXPECT_THROW(parse_config("detuning = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("samples = 999\n"), ConfigError);
  EXPECT_THROW(parse_config("exact_trig = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("mismatch_model = uniform\n"), ConfigError);
  // Mismatch larger than the mean atom number.
  EXPECT_THROW(parse_config("N_bar = 100\ngamma_mismatch = 50\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/diffint.cfg"), ConfigError);
}

TEST(Config, DetuningGivesCaptionCoupling) {
  const Config c = parse_config("detuning = 2.28e10\n");
  EXPECT_NEAR(c.chi_used(), 3.23e-10, 0.01e-10);
  const Config o = parse_config("chi = 1e-4\nn = 1e7\nN_bar = 1e4\ngamma_mismatch = 0\n");
  EXPECT_EQ(o.chi_used(), 1e-4);
  EXPECT_EQ(o.light().photons, 1e7);
  EXPECT_EQ(o.ensemble().mean_atoms(), 1e4);
}

TEST(Config, KeysAndAliases) {
  const Config c = parse_config(
      "varphi = 0.25\ntheta = 0.5\nseed = 9\nsamples = 5000\nmismatch_model = gaussian_width\n"
      "exact_trig = false\ndecoherence = true\noptimize_delta = true\nthreshold = 0.05\n");
  EXPECT_EQ(c.tilt, 0.25);
  EXPECT_EQ(c.theta, 0.5);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.samples, 5000u);
  EXPECT_EQ(c.mismatch_model, MismatchModel::gaussian_width);
  EXPECT_FALSE(c.exact_trig);
  EXPECT_TRUE(c.decoherence);
  EXPECT_TRUE(c.optimize_delta);
  EXPECT_EQ(c.threshold, 0.05);
  const auto path = temp_file("diffint_keys.cfg", "alpha = 0.02\r\nN_bar = 1e9\r\n");
  const Config f = load_config(path.string());
  EXPECT_EQ(f.alpha, 0.02);
  EXPECT_EQ(f.nbar, 1e9);
}

TEST(Csv, SingleRowRoundTrip) {
  const std::vector<SweepRow> rows = {sweep_point(small_spec({Scheme::ss}, 2), Scheme::ss, 3e8)};
  ASSERT_EQ(rows.size(), 1u);
  const std::string text = format_csv(rows);
  const auto lines = split_lines(text);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], csv_header);
  const auto f = split_fields(lines[1]);
  ASSERT_EQ(f.size(), 9u);
  EXPECT_EQ(f[0], "ss");
  const double values[] = {rows[0].nbar,  rows[0].variance, rows[0].cs_variance, rows[0].ratio,
                           rows[0].db,    rows[0].delta,    rows[0].chi};
  for (int i = 0; i < 7; ++i) {
    const double parsed = std::stod(f[i + 1]);
    EXPECT_LE(std::abs(parsed - values[i]), 1e-9 * std::abs(values[i])) << i;
  }
  EXPECT_EQ(f[8], rows[0].assumptions_ok ? "1" : "0");
}

TEST(Csv, LineCountAndLineEndings) {
  const auto rows =
      run_sweep(small_spec({Scheme::cs, Scheme::ss, Scheme::ss_plus, Scheme::js, Scheme::js_plus_corrected}, 20));
  const std::string text = format_csv(rows);
  EXPECT_EQ(split_lines(text).size(), 101u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
}

TEST(Sweep, RatiosAndDecibels) {
  const auto rows = run_sweep(small_spec({Scheme::cs, Scheme::ss, Scheme::js, Scheme::js_plus}, 12));
  ASSERT_EQ(rows.size(), 48u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.db, 10 * std::log10(r.ratio), 1e-9) << scheme_name(r.scheme);
    EXPECT_NEAR(r.ratio, r.variance / r.cs_variance, 1e-12 * r.ratio);
    if (r.scheme == Scheme::cs) {
      EXPECT_EQ(r.ratio, 1.0);
      EXPECT_EQ(r.delta, 0.0);
    }
  }
}

TEST(Sweep, DeterministicBytes) {
  auto spec = small_spec({Scheme::ss, Scheme::js_plus_corrected}, 10);
  spec.threads = 1;
  const std::string a = format_csv(run_sweep(spec));
  spec.threads = 4;
  EXPECT_EQ(a, format_csv(run_sweep(spec)));
  spec.schemes = {Scheme::js_plus_corrected, Scheme::ss, Scheme::ss};
  EXPECT_EQ(a, format_csv(run_sweep(spec)));
}

TEST(Sweep, OptimizedRealisticRows) {
  auto spec = preset_sweep(Preset::realistic);
  spec.points = 4;
  spec.schemes = {Scheme::cs, Scheme::ss};
  const auto rows = run_sweep(spec);
  for (const auto& r : rows) {
    if (r.scheme == Scheme::cs) continue;
    EXPECT_GT(r.delta, 0.0);
    EXPECT_NEAR(r.chi, compute_chi(spec.base.physical.g_eff(), spec.base.physical.linewidth, r.delta),
                1e-9 * r.chi);
    // Detection and decoherence noise dominate below about 1e9 atoms.
    if (r.nbar >= 1e10) {
      EXPECT_LT(r.ratio, 1.0);
    }
  }
}

TEST(Sweep, RejectsBadSpec) {
  auto spec = small_spec({Scheme::ss}, 1);
  EXPECT_THROW(run_sweep(spec), ConfigError);
  spec = small_spec({Scheme::ss}, 5);
  spec.nbar_min = -1;
  EXPECT_THROW(run_sweep(spec), ConfigError);
}

TEST(Svg, ParsesWithOnePolylinePerScheme) {
  const std::vector<Scheme> schemes = {Scheme::cs, Scheme::ss, Scheme::js, Scheme::js_plus_corrected};
  const std::string svg = format_svg(run_sweep(small_spec(schemes, 15)));
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
  std::vector<std::pair<std::string, boost::property_tree::ptree>> elements;
  auto collect = [&](auto& self, const boost::property_tree::ptree& t) -> void {
    for (const auto& [tag, node] : t) {
      elements.emplace_back(tag, node);
      self(self, node);
    }
  };
  collect(collect, tree.get_child("svg"));
  std::vector<std::string> seen;
  int xticks = 0, yticks = 0;
  for (const auto& [tag, node] : elements) {
    if (tag == "line") {
      const auto cls = node.get<std::string>("<xmlattr>.class", "");
      xticks += cls == "xtick";
      yticks += cls == "ytick";
    }
    if (tag != "polyline") continue;
    seen.push_back(node.get<std::string>("<xmlattr>.data-scheme"));
    std::istringstream pts(node.get<std::string>("<xmlattr>.points"));
    double prev = -1e300;
    int count = 0;
    for (std::string pair; pts >> pair; ++count) {
      const double x = std::stod(pair.substr(0, pair.find(',')));
      EXPECT_GT(x, prev);
      prev = x;
    }
    EXPECT_EQ(count, 15);
  }
  ASSERT_EQ(seen.size(), schemes.size());
  for (std::size_t i = 0; i < schemes.size(); ++i) EXPECT_EQ(seen[i], scheme_name(schemes[i]));
  EXPECT_EQ(xticks, 5);  // decades 1e6 .. 1e10
  EXPECT_GE(yticks, 1);
}

TEST(Svg, NeedsTwoPoints) {
  const std::vector<SweepRow> rows = {sweep_point(small_spec({Scheme::ss}, 2), Scheme::ss, 1e8)};
  EXPECT_THROW(format_svg(rows), InvalidParameter);
}

TEST(CompareMc, CoherentAgreesAndScaledVarianceDisagrees) {
  const auto cfg = EnsembleConfig::from_mean(1e4, 0.0, 0.0, 0.0, 0.0);
  const LightConfig light{1e7, 1e-4};
  McOptions opts;
  opts.n_samples = 200'000;
  opts.seed = 5;
  const auto good = compare_mc(cfg, light, SchemeId{Scheme::cs}, opts);
  EXPECT_LT(std::abs(good.z_variance), 4.0);
  EXPECT_TRUE(good.agrees());
  const auto bad = compare_mc(cfg, light, SchemeId{Scheme::cs}, opts, 1.5);
  EXPECT_FALSE(bad.variance_agrees);
  EXPECT_FALSE(bad.agrees());
  EXPECT_NE(format_comparison(bad).find("cs"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("variance --scheme ss"), 0);
  EXPECT_EQ(run_cli("variance --scheme ss --preset realistic --nbar 1e10"), 0);
  EXPECT_EQ(run_cli("sweep --points 5 --scheme all"), 0);
  EXPECT_EQ(run_cli("sagnac"), 0);
  EXPECT_EQ(run_cli("variance --scheme bogus"), 1);
  EXPECT_EQ(run_cli("no-such-command"), 1);

  const auto bad = temp_file("diffint_bad.cfg", "alpha = -1\n");
  EXPECT_EQ(run_cli("variance --scheme ss --config " + bad.string()), 1);
  EXPECT_EQ(run_cli("variance --scheme ss --config /nonexistent/x.cfg"), 1);

  const auto desk = temp_file("diffint_desk.cfg",
                              "n = 1e7\nchi = 1e-4\nN_bar = 1e4\ngamma_mismatch = 0\nalpha = 0\n"
                              "phi = 0\ntheta = 0\nsamples = 100000\n");
  EXPECT_EQ(run_cli("mc --scheme cs,ss --config " + desk.string()), 0);
  // Exact dynamics of the entangled scheme exceed its leading-order variance at this scale.
  EXPECT_EQ(run_cli("mc --scheme ee --config " + desk.string()), 3);
}
