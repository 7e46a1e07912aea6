#include "rarebasis/cli.hpp"

#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "rarebasis/errors.hpp"
#include "rarebasis/json_io.hpp"

namespace rarebasis {
namespace {

struct Config {
  std::string command;
  std::vector<std::int64_t> sequence;
  bool doubling = false;
  std::int64_t m1 = 1;
  std::int64_t k = 0;  // 0 = not given
  std::vector<std::int64_t> finite_scales;
  std::optional<std::string> engine;
  std::int64_t k_min = 4;
  std::int64_t k_max = 12;
  std::vector<int> phi{0, 1, 2};
  int parallel = 1;
  std::string format = "json";
  std::optional<std::string> out_path;
  std::optional<std::string> in_path;
  std::optional<std::string> level;
  bool selftest_engine_fault = false;
};

EngineMode parse_engine(const std::string& name) {
  if (name == "bitset") return EngineMode::bitset;
  if (name == "symbolic") return EngineMode::symbolic;
  if (name == "both") return EngineMode::both;
  throw ValidationError("unknown engine '" + name + "'");
}

// Certificates on small domains always run the two engines in lockstep; an
// explicit request for a single engine there would only remove a check.
EngineMode certificate_engine(const Config& cfg, std::int64_t domain_log2) {
  if (!cfg.engine) {
    return domain_log2 <= RareSet1D::kAutoCrossCheckLog2 ? EngineMode::both
                                                         : EngineMode::symbolic;
  }
  const EngineMode mode = parse_engine(*cfg.engine);
  if (domain_log2 <= RareSet1D::kAutoCrossCheckLog2 && mode != EngineMode::both) {
    throw ValidationError("domains up to 2^" +
                          std::to_string(RareSet1D::kAutoCrossCheckLog2) +
                          " cells are certified by both engines in lockstep; drop "
                          "--engine or pass 'both'");
  }
  return mode;
}

ExponentSequence resolve_sequence(const Config& cfg) {
  const int given = (!cfg.sequence.empty() ? 1 : 0) + (cfg.doubling ? 1 : 0) +
                    (!cfg.finite_scales.empty() ? 1 : 0);
  if (given == 0) {
    throw ValidationError("no scales given: pass --sequence, --doubling, or --finite-s");
  }
  if (given > 1) {
    throw ValidationError("--sequence, --doubling, and --finite-s are mutually exclusive");
  }
  if (!cfg.sequence.empty()) {
    if (cfg.k != 0 && cfg.k != static_cast<std::int64_t>(cfg.sequence.size())) {
      throw ValidationError("--k contradicts the length of --sequence");
    }
    return ExponentSequence::create(cfg.sequence);
  }
  if (cfg.k < 1) throw ValidationError("--doubling and --finite-s need --k");
  if (cfg.doubling) return BasisSpec::all_from(cfg.m1).doubling_subsequence(cfg.k);
  return BasisSpec::finite(cfg.finite_scales).doubling_subsequence(cfg.k);
}

std::string iso_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string scalar_text(const Json& j) {
  const std::string m = j.at("m").get<std::string>();
  const std::int64_t e = j.at("e").get<std::int64_t>();
  if (e == 0) return m;
  return m + "*2^" + std::to_string(e);
}

std::string tracked_text(const Json& j) {
  return j.at("value").get<std::string>() + " (+-" + j.at("abs_error").get<std::string>() +
         ")";
}

void render_rows_csv(const Json& rows, std::ostream& out) {
  out << "k,p,alpha_log2,quarter_sum,lower_bound,denominator,denominator_abs_error,"
         "ratio,ratio_abs_error,exact_ratio\n";
  for (const Json& row : rows) {
    out << row.at("k").get<std::int64_t>() << "," << row.at("p").get<int>() << ","
        << row.at("alpha_log2").get<std::int64_t>() << ","
        << row.at("quarter_sum").get<std::string>() << ","
        << scalar_text(row.at("lower_bound")) << ","
        << row.at("denominator").at("value").get<std::string>() << ","
        << row.at("denominator").at("abs_error").get<std::string>() << ","
        << row.at("ratio").at("value").get<std::string>() << ","
        << row.at("ratio").at("abs_error").get<std::string>() << ","
        << (row.contains("exact_ratio") ? scalar_text(row.at("exact_ratio")) : "")
        << "\n";
  }
}

void render_csv(const Json& bundle, std::ostream& out) {
  const Json& body = bundle.at("body");
  if (body.contains("table")) {
    render_rows_csv(body.at("table").at("rows"), out);
    return;
  }
  if (body.contains("report")) {
    render_rows_csv(body.at("report").at("rows"), out);
    return;
  }
  if (body.contains("certificates")) {
    const Json& cert = body.at("certificates").at(0);
    if (cert.at("type") == "crystal") {
      out << "level,count,area_log2,union_measure\n";
      for (const Json& f : cert.at("families")) {
        out << f.at("level").get<std::int64_t>() << "," << f.at("count").get<std::string>()
            << "," << f.at("area_log2").get<std::int64_t>() << ","
            << scalar_text(f.at("union_measure")) << "\n";
      }
      return;
    }
    out << "r,copies,per_copy_measure,slab_bottom_log2,contribution,floor_bound\n";
    for (const Json& s : cert.at("slabs")) {
      out << s.at("r").get<std::int64_t>() << "," << s.at("copies").get<std::string>()
          << "," << scalar_text(s.at("per_copy_measure")) << ","
          << s.at("slab_bottom_log2").get<std::int64_t>() << ","
          << scalar_text(s.at("contribution")) << "," << scalar_text(s.at("floor_bound"))
          << "\n";
    }
    return;
  }
  throw ValidationError("bundle has no tabular content to render as csv");
}

void render_sequence_line(const Json& seq, std::ostream& out) {
  out << "(";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out << ",";
    out << seq.at(i).get<std::int64_t>();
  }
  out << ")";
}

void render_human(const Json& bundle, std::ostream& out) {
  const Json& body = bundle.at("body");
  out << "command: " << body.at("command").get<std::string>() << "\n";

  if (body.contains("certificates")) {
    for (const Json& cert : body.at("certificates")) {
      const bool crystal = cert.at("type") == "crystal";
      out << (crystal ? "crystal certificate, sequence "
                      : "basis certificate, sequence ");
      render_sequence_line(cert.at("sequence"), out);
      out << ", depth " << cert.at("k").get<std::int64_t>() << "\n";
      if (crystal) {
        for (const Json& f : cert.at("families")) {
          out << "  level " << f.at("level").get<std::int64_t>() << ": "
              << f.at("count").get<std::string>() << " rectangles of area 2^"
              << f.at("area_log2").get<std::int64_t>() << ", union "
              << scalar_text(f.at("union_measure")) << "\n";
        }
        out << "  union measure    " << scalar_text(cert.at("union_measure")) << "\n";
        out << "  half-fill bound  " << scalar_text(cert.at("half_fill_bound")) << "\n";
      } else {
        for (const Json& s : cert.at("slabs")) {
          out << "  scale " << s.at("r").get<std::int64_t>() << ": "
              << s.at("copies").get<std::string>() << " copies, contribution "
              << scalar_text(s.at("contribution")) << " (floor "
              << scalar_text(s.at("floor_bound")) << ")\n";
        }
        out << "  total            " << scalar_text(cert.at("total")) << "\n";
      }
      out << "  required bound   " << scalar_text(cert.at("required_bound")) << "\n";
      out << "  result: " << (cert.at("pass").get<bool>() ? "PASS" : "FAIL")
          << (cert.at("cross_checked").get<bool>() ? " (engines agree)" : "") << "\n";
    }
  }

  if (body.contains("oracle")) {
    const Json& o = body.at("oracle");
    out << "exhaustive superlevel check at level " << scalar_text(o.at("level")) << "\n";
    out << "  certified family union " << o.at("family_union_cells").get<std::string>()
        << " cells\n";
    out << "  exhaustive region      " << o.at("oracle_cells").get<std::string>()
        << " cells\n";
    out << "  inclusion: " << (o.at("inclusion").get<bool>() ? "holds" : "FAILS") << "\n";
  }

  auto render_rows = [&](const Json& rows) {
    out << "  k   p   ratio (abs error)\n";
    for (const Json& row : rows) {
      out << "  " << row.at("k").get<std::int64_t>() << "   " << row.at("p").get<int>()
          << "   " << tracked_text(row.at("ratio")) << "\n";
    }
  };
  if (body.contains("table")) {
    out << "sharpness ratios, depths " << body.at("table").at("k_min").get<std::int64_t>()
        << ".." << body.at("table").at("k_max").get<std::int64_t>() << "\n";
    render_rows(body.at("table").at("rows"));
    for (const Json& line : body.at("trend").at("lines")) {
      out << "  p = " << line.at("p").get<int>() << ": "
          << line.at("classification").get<std::string>() << ", growth degree "
          << tracked_text(line.at("growth_degree")) << "; "
          << line.at("note").get<std::string>() << "\n";
    }
    out << "  note: " << body.at("trend").at("caveat").get<std::string>() << "\n";
  }
  if (body.contains("report")) {
    const Json& rep = body.at("report");
    out << "finite scale pool report, capacity " << rep.at("capacity").get<std::int64_t>()
        << "\n";
    render_rows(rep.at("rows"));
    out << "  " << rep.at("statement").get<std::string>() << "\n";
  }

  out << "overall: " << (body.at("pass").get<bool>() ? "PASS" : "FAIL") << "\n";
}

void render(const Json& bundle, const std::string& format, std::ostream& out) {
  if (format == "json") {
    out << bundle.dump(1) << "\n";
  } else if (format == "csv") {
    render_csv(bundle, out);
  } else if (format == "human") {
    render_human(bundle, out);
  } else {
    throw ValidationError("unknown format '" + format + "'");
  }
}

int emit(const Config& cfg, Json body, bool pass, EngineMode engine_used,
         std::ostream& out) {
  body["version"] = 1;
  body["command"] = cfg.command;
  body["pass"] = pass;
  Json bundle{{"body", std::move(body)},
              {"meta", Json{{"tool", "rarebasis"},
                            {"generated_at", iso_now()},
                            {"engine", engine_name(engine_used)},
                            {"parallel", cfg.parallel}}}};
  if (cfg.out_path) {
    std::ofstream file(*cfg.out_path);
    if (!file) throw ValidationError("cannot open output file " + *cfg.out_path);
    render(bundle, cfg.format, file);
    out << "wrote " << *cfg.out_path << " (" << (pass ? "pass" : "fail") << ")\n";
  } else {
    render(bundle, cfg.format, out);
  }
  return pass ? kExitPass : kExitCertificateFailed;
}

std::vector<PhiSpec> phi_specs(const Config& cfg) {
  std::vector<PhiSpec> phis;
  phis.reserve(cfg.phi.size());
  for (const int p : cfg.phi) phis.push_back(PhiSpec{p});
  return phis;
}

BasisSpec pool_of(const Config& cfg) {
  if (!cfg.sequence.empty()) {
    throw ValidationError("tables take a scale pool (--doubling/--m1 or --finite-s), "
                          "not an explicit --sequence");
  }
  if (!cfg.finite_scales.empty()) return BasisSpec::finite(cfg.finite_scales);
  return BasisSpec::all_from(cfg.m1);
}

int execute(const Config& cfg, std::ostream& out, std::ostream& err) {
  const ParallelOptions par{cfg.parallel};
  VerifyOptions verify;
  verify.inject_engine_fault = cfg.selftest_engine_fault;

  if (cfg.command == "verify-crystal" || cfg.command == "verify-basis") {
    const ExponentSequence seq = resolve_sequence(cfg);
    const EngineMode mode = certificate_engine(cfg, seq.m_k());
    Json body;
    body["inputs"] = Json{{"sequence", to_json(seq)}};
    bool pass = false;
    if (cfg.command == "verify-crystal") {
      const CrystalCertificate cert =
          certify_crystal(Crystal2D::build(seq), mode, par, verify);
      pass = cert.pass;
      body["certificates"] = Json::array({to_json(cert)});
    } else {
      const BasisCertificate cert = certify_basis(seq, mode, par, verify);
      pass = cert.pass;
      body["certificates"] = Json::array({to_json(cert)});
    }
    return emit(cfg, std::move(body), pass, mode, out);
  }

  if (cfg.command == "oracle-check") {
    const ExponentSequence seq = resolve_sequence(cfg);
    const Crystal2D crystal = Crystal2D::build(seq);
    DyadicScalar level = DyadicScalar::pow2(-seq.k());
    if (cfg.level) {
      try {
        level = DyadicScalar::parse(*cfg.level);
      } catch (const ArithmeticError& e) {
        throw ValidationError(e.what());
      }
    }
    if (level.sign() <= 0) throw ValidationError("--level must be positive");

    std::vector<RectFamily> fams;
    for (std::int64_t j = 1; j <= (seq.k() + 3) / 4; ++j) {
      fams.push_back(build_rect_family(crystal, j));
    }
    const Raster2D painted = rasterize_families(crystal, fams);
    const Raster2D oracle = brute_force_superlevel(crystal, level);
    const bool inclusion = painted.subset_of(oracle);

    Json body;
    body["inputs"] = Json{{"sequence", to_json(seq)}, {"level", to_json(level)}};
    body["oracle"] = Json{{"level", to_json(level)},
                          {"family_union_cells", BigInt(painted.count()).str()},
                          {"oracle_cells", BigInt(oracle.count()).str()},
                          {"inclusion", inclusion}};
    return emit(cfg, std::move(body), inclusion, EngineMode::both, out);
  }

  if (cfg.command == "sharpness-table") {
    const EngineMode mode = cfg.engine ? parse_engine(*cfg.engine) : EngineMode::symbolic;
    const BasisSpec pool = pool_of(cfg);
    const SharpnessTable table =
        sharpness_table(pool, cfg.k_min, cfg.k_max, phi_specs(cfg), mode, par, verify);
    const TrendReport trend = trend_report(table);
    bool pass = true;
    for (const TrendLine& line : trend.lines) pass = pass && line.checks_pass;
    Json body;
    body["inputs"] = Json{{"pool", pool.describe()},
                          {"k_min", cfg.k_min},
                          {"k_max", cfg.k_max},
                          {"phi", Json(cfg.phi)}};
    body["table"] = to_json(table);
    body["trend"] = to_json(trend);
    return emit(cfg, std::move(body), pass, mode, out);
  }

  if (cfg.command == "finite-s-report") {
    const EngineMode mode = cfg.engine ? parse_engine(*cfg.engine) : EngineMode::symbolic;
    if (cfg.finite_scales.empty()) {
      throw ValidationError("finite-s-report needs --finite-s");
    }
    const BasisSpec pool = BasisSpec::finite(cfg.finite_scales);
    const FiniteSReport report = finite_s_report(pool, phi_specs(cfg), mode, par, verify);
    Json body;
    body["inputs"] = Json{{"scales", Json(cfg.finite_scales)}, {"phi", Json(cfg.phi)}};
    body["report"] = to_json(report);
    return emit(cfg, std::move(body), true, mode, out);
  }

  if (cfg.command == "export") {
    std::ifstream file(*cfg.in_path);
    if (!file) throw ValidationError("cannot open input file " + *cfg.in_path);
    Json bundle;
    try {
      bundle = Json::parse(file);
    } catch (const Json::exception& e) {
      throw ValidationError("input is not a result bundle: " + std::string(e.what()));
    }
    if (!bundle.contains("body")) {
      throw ValidationError("input is not a result bundle: no body");
    }
    if (cfg.out_path) {
      std::ofstream ofile(*cfg.out_path);
      if (!ofile) throw ValidationError("cannot open output file " + *cfg.out_path);
      render(bundle, cfg.format, ofile);
      out << "wrote " << *cfg.out_path << "\n";
    } else {
      render(bundle, cfg.format, out);
    }
    return kExitPass;
  }

  err << "unknown command " << cfg.command << "\n";
  return kExitValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"exact certificates for the superlevel sets of rare-basis maximal averages"};
  app.require_subcommand(1);

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--sequence", cfg.sequence,
                    "explicit scale exponents m_1,m_2,... (comma separated)")
        ->delimiter(',');
    sub->add_flag("--doubling", cfg.doubling,
                  "use the doubling chain m_1, 2*m_1, 4*m_1, ...");
    sub->add_option("--m1", cfg.m1, "first scale of the doubling chain");
    sub->add_option("--k", cfg.k, "construction depth");
    sub->add_option("--finite-s", cfg.finite_scales,
                    "finite scale pool (comma separated)")
        ->delimiter(',');
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--engine", cfg.engine, "bitset | symbolic | both")
        ->check(CLI::IsMember({"bitset", "symbolic", "both"}));
    sub->add_option("--parallel", cfg.parallel, "worker threads")
        ->check(CLI::Range(1, 256));
    sub->add_option("--format", cfg.format, "json | csv | human")
        ->check(CLI::IsMember({"json", "csv", "human"}));
    sub->add_option("--out", cfg.out_path, "write the rendering to this file");
    sub->add_flag("--selftest-engine-fault", cfg.selftest_engine_fault,
                  "inject an engine mismatch (self test)")
        ->group("");
  };

  CLI::App* crystal = app.add_subcommand(
      "verify-crystal", "certify the plane superlevel bound for one crystal");
  add_inputs(crystal);
  add_common(crystal);

  CLI::App* basis = app.add_subcommand(
      "verify-basis", "certify the full slab-sum volume bound for one construction");
  add_inputs(basis);
  add_common(basis);

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "compare certified families against the exhaustive region");
  add_inputs(oracle);
  add_common(oracle);
  oracle->add_option("--level", cfg.level,
                     "averaging level, e.g. 1*2^-4 (default: 2^-k)");

  CLI::App* table = app.add_subcommand(
      "sharpness-table", "tabulate certified blow-up ratios against x*ln(1+x)^p");
  add_inputs(table);
  add_common(table);
  table->add_option("--kmin", cfg.k_min, "smallest depth")->check(CLI::Range(1, 1 << 20));
  table->add_option("--kmax", cfg.k_max, "largest depth")->check(CLI::Range(1, 1 << 20));
  table->add_option("--phi", cfg.phi, "gauge powers p (comma separated)")->delimiter(',');

  CLI::App* finite = app.add_subcommand(
      "finite-s-report", "ratio table and finiteness statement for a finite scale pool");
  add_inputs(finite);
  add_common(finite);
  finite->add_option("--phi", cfg.phi, "gauge powers p (comma separated)")->delimiter(',');

  CLI::App* exp = app.add_subcommand("export", "re-render a result bundle");
  exp->add_option("--in", cfg.in_path, "bundle file produced by another command")
      ->required();
  exp->add_option("--format", cfg.format, "json | csv | human")
      ->check(CLI::IsMember({"json", "csv", "human"}));
  exp->add_option("--out", cfg.out_path, "write the rendering to this file");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("rarebasis");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitValidation;
  }

  for (CLI::App* sub : {crystal, basis, oracle, table, finite, exp}) {
    if (app.got_subcommand(sub)) {
      cfg.command = sub->get_name();
      break;
    }
  }

  try {
    return execute(cfg, out, err);
  } catch (const CapacityError& e) {
    err << "validation error: " << e.what() << "\n";
    err << "available depth: " << e.capacity << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EngineDisagreement& e) {
    err << "engine disagreement: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace rarebasis
