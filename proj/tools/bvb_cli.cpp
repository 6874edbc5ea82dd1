// Batch front end: operator analysis, linearization and the grid field lab.

#include "bvb/bvb.hpp"
#include "bvb/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace bvb;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitVerification = 3;

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct OperatorArgs {
  std::string spec;
  int n = 0;
  int order = 1;
  std::string coordinates = "orthonormal";
};

void add_operator_args(CLI::App* cmd, OperatorArgs& a) {
  cmd->add_option("spec", a.spec, "operator spec file, or catalog:<name>")->required();
  cmd->add_option("--n", a.n, "dimension for catalog operators");
  cmd->add_option("--order", a.order, "order for catalog gradient/hessian powers");
  cmd->add_option("--coordinates", a.coordinates, "orthonormal | dyadic (catalog only)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

DiffOperator load_operator(const OperatorArgs& a) {
  const std::string prefix = "catalog:";
  if (a.spec.rfind(prefix, 0) == 0) {
    if (a.n < 1) throw InputError("--n is required with " + a.spec);
    Json doc{{"catalog", a.spec.substr(prefix.size())},
             {"n", a.n},
             {"order", a.order},
             {"coordinates", a.coordinates}};
    return operator_from_json(doc);
  }
  return operator_from_text(read_file(a.spec));
}

void emit(const Json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw InputError("cannot write " + out);
  os << text;
}

Json header(const std::string& command, const DiffOperator& op, std::uint64_t seed) {
  const Json spec = operator_to_json(op);
  return {{"tool", "bvb_cli"},
          {"version", kToolVersion},
          {"command", command},
          {"seed", seed},
          {"inputs", {{"operator_digest", digest(spec)}, {"operator", spec}}}};
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(what + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw InputError(what + ": empty list");
  return out;
}

RealVector to_vector(const std::vector<double>& xs) {
  return Eigen::Map<const RealVector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

double parse_spacing(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return std::stod(text);
    return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
  } catch (const std::exception&) {
    throw InputError("--h: cannot parse '" + text + "'");
  }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  OperatorArgs op;
  int resolution = 32;
  int dmax = 5;
  int restarts = 20;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  const DiffOperator op = load_operator(a.op);
  Json rep = header("analyze", op, a.seed);
  const auto ell = ellipticity_constant(op, a.resolution);
  const auto c = is_c_elliptic(op, a.dmax, a.restarts, a.seed);
  rep["ellipticity"] = to_json(ell);
  rep["c_ellipticity"] = to_json(c);
  rep["ell"] = c.nullspace.ell ? Json(*c.nullspace.ell) : Json(nullptr);
  if (op.order() == 1) {
    rep["mixing"] = to_json(mixing_triple_test(op, a.trials, a.seed));
  } else {
    rep["mixing"] = {{"status", "skipped"}, {"reason", "triple test is defined for first-order operators"}};
  }
  std::vector<std::string> problems;
  if (c.decision == Decision::inconclusive) problems.push_back("complex ellipticity is INCONCLUSIVE");
  if (c.decision == Decision::pass && !ell.elliptic) {
    problems.push_back("C-elliptic PASS but the real symbol degenerates");
  }
  rep["consistent"] = problems.empty();
  rep["problems"] = problems;
  emit(rep, a.out);
  return problems.empty() ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------------------
// linearize
// ---------------------------------------------------------------------------

struct LinearizeArgs {
  OperatorArgs op;
  int dmax = 5;
  int restarts = 20;
  std::uint64_t seed = 0;
  std::string lifted;
  std::string out;
};

constexpr int kRoundTripPolynomials = 5;
constexpr double kRoundTripTolerance = 1e-8;

PolynomialField random_polynomial(int n, int dim_v, int degree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-3, 3);
  PolynomialField p(n, dim_v);
  for (const auto& beta : multiindices_up_to(n, degree)) {
    RealVector v(dim_v);
    for (int j = 0; j < dim_v; ++j) v(j) = coef(rng);
    p.add_term(beta, v);
  }
  return p;
}

int run_linearize(const LinearizeArgs& a) {
  const DiffOperator op = load_operator(a.op);
  Json rep = header("linearize", op, a.seed);
  const auto lin = linearize(op);
  const Json lifted = operator_to_json(lin.lifted);
  rep["lifted"] = lifted;
  rep["lifted_digest"] = digest(lifted);
  rep["tilde_rows"] = {lin.tilde_rows.first, lin.tilde_rows.second};
  rep["curl_rows"] = {lin.curl_rows.first, lin.curl_rows.second};
  Json constants = Json::array();
  for (const auto& [key, c] : lin.constants) {
    constants.push_back({{"i", key.first}, {"beta", key.second.entries()}, {"c", c}});
  }
  rep["constants"] = constants;

  std::vector<double> residuals;
  for (int t = 0; t < kRoundTripPolynomials; ++t) {
    auto rng = seeded_engine(a.seed, static_cast<std::uint64_t>(t));
    const auto p = random_polynomial(op.n(), op.dim_v(), op.order() + 2, rng);
    residuals.push_back(linearization_residual(lin, op, p));
  }
  const double worst = *std::max_element(residuals.begin(), residuals.end());
  rep["round_trip"] = {{"polynomials", kRoundTripPolynomials},
                       {"degree", op.order() + 2},
                       {"residuals", residuals},
                       {"max_residual", worst},
                       {"tolerance", kRoundTripTolerance}};

  const auto before = is_c_elliptic(op, a.dmax, a.restarts, a.seed);
  const auto after = is_c_elliptic(lin.lifted, a.dmax, a.restarts, a.seed);
  rep["c_ellipticity"] = {{"input", to_string(before.decision)},
                          {"lifted", to_string(after.decision)},
                          {"d_max", a.dmax},
                          {"restarts", a.restarts}};

  if (!a.lifted.empty()) {
    std::ofstream os(a.lifted, std::ios::binary);
    if (!os) throw InputError("cannot write " + a.lifted);
    os << lifted.dump(2) << "\n";
  }
  emit(rep, a.out);
  if (!(worst <= kRoundTripTolerance)) return kExitVerification;
  if (before.decision != after.decision) return kExitVerification;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fieldlab
// ---------------------------------------------------------------------------

struct FieldlabArgs {
  OperatorArgs op;
  std::string jump;
  std::string smooth;
  std::string field;
  std::string point;
  double offset = 0.05;
  std::string h = "1/64";
  double box = 0.5;
  std::string radii = "0.4,0.2,0.1";
  int dmax = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::string save_field;
};

struct Scenario {
  std::string kind;
  GridField field;
  RealVector point;
  std::optional<JumpTriple> planted;
  Json description;
};

Scenario build_scenario(const FieldlabArgs& a, const DiffOperator& op) {
  const int n = op.n(), dv = op.dim_v();
  const int chosen = !a.jump.empty() + !a.smooth.empty() + !a.field.empty();
  if (chosen != 1) throw InputError("exactly one of --jump, --smooth or --field is required");

  if (!a.field.empty()) {
    GridField f = load_grid_field(a.field);
    if (f.grid().n() != n || f.dim_v() != dv) {
      throw InputError("--field: grid dimension or value dimension does not match the operator");
    }
    RealVector x = a.point.empty() ? RealVector::Zero(n) : to_vector(parse_list(a.point, "--point"));
    Json d{{"kind", "file"}, {"path", a.field}, {"digest", hex64(fnv1a64(read_file(a.field)))}};
    return {"file", std::move(f), std::move(x), std::nullopt, std::move(d)};
  }

  const double h = parse_spacing(a.h);
  if (!(h > 0)) throw InputError("--h must be positive");
  const Grid grid(n, -a.box, a.box, h);

  if (!a.jump.empty()) {
    std::vector<std::string> parts;
    std::string spec = a.jump;
    std::replace(spec.begin(), spec.end(), '|', ';');  // '|' is accepted where ';' is awkward to quote
    std::stringstream s(spec);
    std::string item;
    while (std::getline(s, item, ';')) parts.push_back(item);
    if (parts.size() != 3) throw InputError("--jump: expected \"a;b;nu\"");
    const RealVector pa = to_vector(parse_list(parts[0], "--jump a"));
    const RealVector pb = to_vector(parse_list(parts[1], "--jump b"));
    RealVector nu = to_vector(parse_list(parts[2], "--jump nu"));
    if (pa.size() != dv || pb.size() != dv) {
      throw InputError("--jump: a and b need " + std::to_string(dv) + " entries");
    }
    if (nu.size() != n || !(nu.norm() > 0)) {
      throw InputError("--jump: nu needs " + std::to_string(n) + " entries, not all zero");
    }
    nu.normalize();
    GridField f = synth_jump(constant_field(pa, n), constant_field(pb, n), nu, a.offset, grid);
    RealVector x = a.point.empty() ? RealVector(a.offset * nu) : to_vector(parse_list(a.point, "--point"));
    Json d{{"kind", "jump"},
           {"a", vector_to_json(pa)},
           {"b", vector_to_json(pb)},
           {"nu", vector_to_json(nu)},
           {"offset", a.offset}};
    return {"jump", std::move(f), std::move(x), JumpTriple{pa, pb, nu}, std::move(d)};
  }

  GridField f(grid, dv);
  if (a.smooth == "sin1") {
    f = GridField::from_function(grid, dv, [&](const RealVector& y) {
      return RealVector::Constant(dv, std::sin(y(0)));
    });
  } else if (a.smooth == "rigid") {
    if (dv != n || n < 2) throw InputError("--smooth rigid needs dimV == n >= 2");
    f = GridField::from_function(grid, dv, [&](const RealVector& y) {
      RealVector v = RealVector::Zero(n);
      v(0) = 0.5 - y(1);
      v(1) = -0.25 + y(0);
      return v;
    });
  } else {
    throw InputError("--smooth: unknown expression '" + a.smooth + "' (sin1 | rigid)");
  }
  RealVector x = a.point.empty() ? RealVector::Zero(n) : to_vector(parse_list(a.point, "--point"));
  return {"smooth", std::move(f), std::move(x), std::nullopt, Json{{"kind", "smooth"}, {"expr", a.smooth}}};
}

void write_csv(const std::filesystem::path& path, const std::vector<double>& r, const std::vector<double>& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  write_profile_csv(os, r, v);
}

int run_fieldlab(const FieldlabArgs& a) {
  const DiffOperator op = load_operator(a.op);
  Scenario sc = build_scenario(a, op);
  const auto& g = sc.field.grid();
  if (sc.point.size() != g.n()) throw InputError("--point needs " + std::to_string(g.n()) + " entries");

  std::vector<double> radii = parse_list(a.radii, "--radii");
  std::sort(radii.begin(), radii.end(), std::greater<>());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  for (double r : radii) {
    if (!(r >= 2 * g.h())) {
      throw InputError("--radii: radius " + std::to_string(r) + " is below 2h = " + std::to_string(2 * g.h()));
    }
    if (!g.contains_ball(sc.point, r)) {
      throw InputError("--radii: ball of radius " + std::to_string(r) + " leaves the grid");
    }
  }
  if (!a.save_field.empty()) save_grid_field(a.save_field, sc.field);

  Json rep = header("fieldlab", op, a.seed);
  rep["scenario"] = sc.description;
  rep["grid"] = {{"n", g.n()}, {"lo", g.lo()}, {"hi", g.hi()}, {"h", g.h()}, {"cells", g.cell_count()}};
  rep["point"] = vector_to_json(sc.point);
  rep["radii"] = radii;

  const auto mu = discrete_apply(op, sc.field);
  rep["total_variation"] = total_variation(mu);

  const auto detected = jump_detect(sc.field, sc.point, radii);
  rep["jump"] = detected ? to_json(*detected) : Json(nullptr);

  const auto density = upper_density(mu, sc.point, radii);
  rep["upper_density"] = to_json(density);

  std::vector<std::string> problems;
  if (sc.planted) {
    if (!detected) {
      problems.push_back("planted jump not detected");
    } else {
      rep["jump_normal_error"] = std::min((detected->nu - sc.planted->nu).norm(),
                                          (detected->nu + sc.planted->nu).norm());
    }
    try {
      rep["structure"] = to_json(structure_check(op, sc.field, *sc.planted,
                                                 Hyperplane{sc.planted->nu, a.offset}));
    } catch (const std::invalid_argument& e) {
      rep["structure"] = {{"status", "skipped"}, {"reason", e.what()}};
    }
  } else if (sc.kind == "smooth" && detected) {
    problems.push_back("jump detected in a smooth field");
  }

  const auto c = is_c_elliptic(op, a.dmax, 20, a.seed);
  std::optional<QuasiContinuityReport> qc;
  if (c.decision == Decision::pass) {
    qc = quasi_continuity_ratio(sc.field, op, sc.point, radii, a.dmax);
    rep["quasi_continuity"] = to_json(*qc);
  } else {
    rep["quasi_continuity"] = {{"status", "skipped"},
                               {"reason", "operator is not C-elliptic (" + to_string(c.decision) + ")"}};
  }
  rep["consistent"] = problems.empty();
  rep["problems"] = problems;

  if (!a.out.empty()) {
    const std::filesystem::path dir(a.out);
    std::filesystem::create_directories(dir);
    write_csv(dir / "upper_density.csv", density.radii, density.values);
    if (qc) {
      std::vector<double> r, v;
      for (const auto& e : qc->entries) {
        r.push_back(e.r);
        v.push_back(e.ratio);
      }
      write_csv(dir / "quasi_continuity.csv", r, v);
    }
    emit(rep, (dir / "report.json").string());
  }
  emit(rep, "");
  return problems.empty() ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------------------
// catalog
// ---------------------------------------------------------------------------

int run_catalog() {
  Json list = Json::array();
  for (const auto& name : catalog_names()) {
    Json entry{{"name", name}};
    Json dims = Json::object();
    for (int n : {2, 3}) {
      try {
        const auto op = catalog(name, n);
        dims["n=" + std::to_string(n)] = {{"k", op.order()}, {"dimV", op.dim_v()}, {"dimW", op.dim_w()}};
      } catch (const std::invalid_argument& e) {
        dims["n=" + std::to_string(n)] = e.what();
      }
    }
    entry["shapes"] = dims;
    list.push_back(entry);
  }
  std::cout << Json{{"operators", list}}.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bvb_cli: symbol analysis and grid experiments for constant-coefficient operators"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* ca = app.add_subcommand("analyze", "ellipticity, complex ellipticity, l and mixing report");
  add_operator_args(ca, analyze.op);
  ca->add_option("--resolution", analyze.resolution, "sphere grid resolution")->capture_default_str();
  ca->add_option("--dmax", analyze.dmax, "degree cap for the polynomial null space")->capture_default_str();
  ca->add_option("--restarts", analyze.restarts, "complex search restarts")->capture_default_str();
  ca->add_option("--trials", analyze.trials, "mixing triple trials")->capture_default_str();
  ca->add_option("--seed", analyze.seed, "RNG seed")->capture_default_str();
  ca->add_option("--out", analyze.out, "report file (default stdout)");

  LinearizeArgs lin;
  auto* cl = app.add_subcommand("linearize", "first-order lift with round-trip verification");
  add_operator_args(cl, lin.op);
  cl->add_option("--dmax", lin.dmax, "degree cap for the complex ellipticity comparison")->capture_default_str();
  cl->add_option("--restarts", lin.restarts, "complex search restarts")->capture_default_str();
  cl->add_option("--seed", lin.seed, "RNG seed")->capture_default_str();
  cl->add_option("--lifted", lin.lifted, "write the lifted operator spec here");
  cl->add_option("--out", lin.out, "report file (default stdout)");

  FieldlabArgs fl;
  auto* cf = app.add_subcommand("fieldlab", "synthesize a field and run the grid diagnostics");
  cf->set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  add_operator_args(cf, fl.op);
  cf->add_option("--jump", fl.jump, "planted interface \"a;b;nu\" (or a|b|nu) with comma-separated vectors");
  cf->add_option("--smooth", fl.smooth, "smooth field: sin1 | rigid");
  cf->add_option("--field", fl.field, "load a binary grid field instead");
  cf->add_option("--point", fl.point, "centre of the balls (default: on the interface, or 0)");
  cf->add_option("--offset", fl.offset, "interface offset along nu")->capture_default_str();
  cf->add_option("--h", fl.h, "grid spacing, e.g. 1/64")->capture_default_str();
  cf->add_option("--box", fl.box, "half-width of the box [-box, box]^n")->capture_default_str();
  cf->add_option("--radii", fl.radii, "comma-separated radii")->capture_default_str();
  cf->add_option("--dmax", fl.dmax, "degree cap for l")->capture_default_str();
  cf->add_option("--seed", fl.seed, "RNG seed")->capture_default_str();
  cf->add_option("--out", fl.out, "directory for CSV profiles and report.json");
  cf->add_option("--save-field", fl.save_field, "write the synthesized field (binary)");

  app.add_subcommand("catalog", "list built-in operators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*ca) return run_analyze(analyze);
    if (*cl) return run_linearize(lin);
    if (*cf) return run_fieldlab(fl);
    return run_catalog();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  }
}
