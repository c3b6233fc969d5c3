#include "hdlss/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hdlss/model_json.hpp"

namespace hdlss::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool wants(const RunConfig& c, OutputFormat f) { return c.formats.count(f) > 0; }

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  f << content;
  f.flush();
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

json header(const RunConfig& c, std::string_view command) {
  json j{{"spec_version", kSpecVersion}, {"command", command}, {"model", model_to_json(c.plan.model)}};
  if (!c.name.empty()) j["name"] = c.name;
  return j;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

json condition_json(const ConditionVerdict& v) {
  json j{{"k", v.k},
         {"epsilon_condition", to_string(v.epsilon_condition)},
         {"strong_epsilon_condition", to_string(v.strong_epsilon_condition)},
         {"basis", to_string(v.basis)}};
  j["strong_index"] = v.strong_index ? json(*v.strong_index) : json(nullptr);
  return j;
}

std::string group_text(const std::vector<std::size_t>& g) {
  if (g.empty()) return "-";
  std::string s = "{";
  for (std::size_t t = 0; t < g.size(); ++t) s += (t ? "," : "") + std::to_string(g[t]);
  return s + "}";
}

void warn_hypotheses(const RunConfig& c, std::ostream& err) {
  if (!c.plan.noise.independent_components())
    err << "warning: " << to_string(c.plan.noise.law)
        << " noise is not rho-mixing; the predictions assume it is\n";
  if (c.plan.model.mixing() == Mixing::NotRhoMixing)
    err << "warning: the model is declared not_rho_mixing; the predictions assume rho-mixing\n";
}

struct Prediction {
  SpikeStructure structure;
  RegimeVerdict verdict;
  std::vector<EigenvalueLimit> limits;
};

Prediction predict(const RunConfig& c) {
  Prediction p;
  p.structure = derive_spike_structure(c.plan.model, c.plan.n_grid.front(), c.plan.noise);
  p.verdict = classify(p.structure);
  p.limits = predict_eigenvalue_limits(p.structure, c.plan.noise.law == NoiseLaw::Gaussian);
  return p;
}

json structure_json(const SpikeStructure& s) {
  json groups = json::array();
  for (std::size_t l = 1; l <= s.groups.size(); ++l)
    groups.push_back({{"alpha", s.groups[l - 1].alpha},
                      {"c", s.groups[l - 1].scales},
                      {"indices", s.group_indices(l)}});
  json tail = condition_json(s.tail.epsilon_condition);
  tail["trace_linear"] = s.tail.trace_linear;
  tail["K"] = s.tail.limit_constant ? json(*s.tail.limit_constant) : json(nullptr);
  return {{"n", s.n},
          {"kappa", s.kappa()},
          {"groups", std::move(groups)},
          {"tail", std::move(tail)},
          {"z_assumption", s.z_assumption == ZAssumption::IndependentBounded8th
                               ? "independent_bounded_8th"
                               : "rho_mixing_bounded_4th"}};
}

std::optional<BlockCase> block_case(const CovarianceModel& m) {
  if (const auto* f = m.get_if<family::BlockEquicorrelation>()) return block_regime(f->rho1, f->rho2);
  return std::nullopt;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnsupportedStructure:
    case ErrorKind::BoundaryUnsupported:
    case ErrorKind::UnsupportedEigenvector:
    case ErrorKind::UndefinedSphericity:
      return kExitUnsupported;
    case ErrorKind::ExcessiveFailures:
    case ErrorKind::RankDeficiency:
      return kExitExcessiveFailures;
    case ErrorKind::Io:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

void apply(const Overrides& o, RunConfig& c) {
  if (o.out) c.out_dir = *o.out;
  if (o.seed) c.plan.seed.master_seed = *o.seed;
  if (o.jobs) c.plan.jobs = *o.jobs;
  if (o.format) c.formats = {*o.format};
}

int cmd_spectrum(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto& model = c.plan.model;
  const auto& grid = c.plan.d_grid;
  std::vector<SphericityReport> rows;
  std::vector<EigenSpectrum> spectra;
  for (std::size_t d : grid) {
    spectra.push_back(eigenvalues(model, d));
    if (c.k > d) throw Error(ErrorKind::InvalidIndex, "plan.k exceeds a grid dimension");
    rows.push_back(sphericity(spectra.back(), c.k));
  }
  const ConditionVerdict verdict = condition_check(model, c.k, grid);

  prepare_dir(c.out_dir);
  if (wants(c, OutputFormat::Csv)) {
    std::string csv = "d,k,epsilon_k,d_epsilon_k,sqrtd_epsilon_k\n";
    for (std::size_t t = 0; t < grid.size(); ++t)
      csv += std::to_string(grid[t]) + ',' + std::to_string(c.k) + ',' + fmt(rows[t].epsilon_k) + ',' +
             fmt(rows[t].d_epsilon_k) + ',' + fmt(rows[t].sqrtd_epsilon_k) + '\n';
    write_file(c.out_dir / "sphericity.csv", csv);

    std::string eig = "d,i,lambda\n";
    for (std::size_t t = 0; t < grid.size(); ++t) {
      const std::size_t top = std::min<std::size_t>(grid[t], std::max<std::size_t>(10, c.k + 1));
      for (std::size_t i = 1; i <= top; ++i)
        eig += std::to_string(grid[t]) + ',' + std::to_string(i) + ',' + fmt(spectra[t].at(i - 1)) + '\n';
    }
    write_file(c.out_dir / "eigenvalues.csv", eig);
  }
  if (wants(c, OutputFormat::Json)) {
    json j = header(c, "spectrum");
    j["condition"] = condition_json(verdict);
    json table = json::array();
    for (std::size_t t = 0; t < grid.size(); ++t)
      table.push_back({{"d", grid[t]},
                       {"k", c.k},
                       {"epsilon_k", rows[t].epsilon_k},
                       {"d_epsilon_k", rows[t].d_epsilon_k},
                       {"sqrtd_epsilon_k", rows[t].sqrtd_epsilon_k}});
    j["sphericity"] = std::move(table);
    write_file(c.out_dir / "spectrum.json", json_text(j));
  }
  if (wants(c, OutputFormat::Text)) {
    out << std::left << std::setw(12) << "d" << std::setw(16) << "epsilon_k" << std::setw(16)
        << "d*epsilon_k" << "sqrt(d)*epsilon_k\n";
    for (std::size_t t = 0; t < grid.size(); ++t)
      out << std::setw(12) << grid[t] << std::setw(16) << fmt(rows[t].epsilon_k) << std::setw(16)
          << fmt(rows[t].d_epsilon_k) << fmt(rows[t].sqrtd_epsilon_k) << '\n';
    out << "epsilon-condition (k = " << c.k << "): " << to_string(verdict.epsilon_condition)
        << "\nstrong epsilon-condition: " << to_string(verdict.strong_epsilon_condition);
    if (verdict.strong_index) out << " (l = " << *verdict.strong_index << ")";
    out << "\nbasis: " << to_string(verdict.basis) << '\n';
  }
  return kExitPass;
}

int cmd_classify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  warn_hypotheses(c, err);
  const Prediction p = predict(c);
  const auto block = block_case(c.plan.model);

  prepare_dir(c.out_dir);
  if (wants(c, OutputFormat::Csv)) {
    std::string csv = "i,verdict,group,law,scale_exponent\n";
    for (std::size_t t = 0; t < p.verdict.directions.size(); ++t) {
      const auto& d = p.verdict.directions[t];
      const auto& l = p.limits[t];
      std::string g;
      for (std::size_t x = 0; x < d.group.size(); ++x) g += (x ? " " : "") + std::to_string(d.group[x]);
      csv += std::to_string(d.index) + ',' + std::string(to_string(d.verdict)) + ',' + g + ',' +
             std::string(to_string(l.law)) + ',' + fmt(l.scale_exponent) + '\n';
    }
    write_file(c.out_dir / "regime.csv", csv);
  }
  if (wants(c, OutputFormat::Json)) {
    json j = header(c, "classify");
    j["structure"] = structure_json(p.structure);
    j["verdict"] = to_json(p.verdict);
    j["limits"] = to_json(p.limits);
    if (block) j["block_case"] = {{"case", static_cast<int>(*block)}, {"label", to_string(*block)}};
    write_file(c.out_dir / "regime.json", json_text(j));
  }
  if (wants(c, OutputFormat::Text)) {
    out << std::left << std::setw(5) << "i" << std::setw(24) << "verdict" << std::setw(10) << "group"
        << std::setw(22) << "limit law" << "mode\n";
    const std::string mode(to_string(p.verdict.mode));
    for (std::size_t t = 0; t < p.verdict.directions.size(); ++t) {
      const auto& d = p.verdict.directions[t];
      out << std::setw(5) << d.index << std::setw(24) << to_string(d.verdict) << std::setw(10)
          << group_text(d.group) << std::setw(22) << to_string(p.limits[t].law) << mode << '\n';
    }
    for (const auto& d : p.verdict.directions)
      if (d.group.size() > 1 && d.growing_n_consistent)
        out << "direction " << d.index << " becomes consistent as n grows (distinct constants)\n";
    if (block) out << "block case " << static_cast<int>(*block) << ": " << to_string(*block) << '\n';
  }
  return kExitPass;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  prepare_dir(c.out_dir);
  const AggregateReport report =
      run_experiment(c.plan, [&](const std::string& line) { err << line << '\n'; });
  if (wants(c, OutputFormat::Csv)) write_file(c.out_dir / "report.csv", report.to_csv());
  if (wants(c, OutputFormat::Json)) {
    json j = header(c, "simulate");
    j["report"] = report.to_json();
    write_file(c.out_dir / "report.json", json_text(j));
  }
  if (wants(c, OutputFormat::Text)) {
    out << std::left << std::setw(10) << "d" << std::setw(34) << "metric" << std::setw(14) << "median"
        << "failures\n";
    for (const auto& cell : report.cells) {
      std::string metric = cell.metric;
      if (report.multi_n) metric += "@n" + std::to_string(cell.n);
      out << std::setw(10) << cell.d << std::setw(34) << metric << std::setw(14)
          << fmt(cell.summary.q50) << cell.failures << '\n';
    }
  }
  return kExitPass;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  warn_hypotheses(c, err);
  const Prediction p = predict(c);
  prepare_dir(c.out_dir);
  const VerificationReport vr = verify_prediction(
      c.plan, p.verdict, p.limits, [&](const std::string& line) { err << line << '\n'; });

  if (wants(c, OutputFormat::Csv)) write_file(c.out_dir / "report.csv", vr.aggregate.to_csv());
  if (wants(c, OutputFormat::Json)) {
    json j = header(c, "verify");
    j["verdict"] = to_json(p.verdict);
    j["verification"] = vr.to_json();
    write_file(c.out_dir / "verify.json", json_text(j));
  }
  if (wants(c, OutputFormat::Text)) {
    for (const auto& check : vr.checks)
      out << (check.passed ? "PASS  " : "FAIL  ") << check.name << "  [" << check.detail << "]\n";
    out << (vr.passed() ? "verification passed" : "verification FAILED") << '\n';
  }
  return vr.passed() ? kExitPass : kExitVerificationFailed;
}

int run_command(std::string_view command, const std::filesystem::path& config,
                const Overrides& overrides, std::ostream& out, std::ostream& err) {
  try {
    RunConfig c = load_config(config);
    apply(overrides, c);
    if (command == "spectrum") return cmd_spectrum(c, out, err);
    if (command == "classify") return cmd_classify(c, out, err);
    if (command == "simulate") return cmd_simulate(c, out, err);
    if (command == "verify") return cmd_verify(c, out, err);
    err << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [io]: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace hdlss::cli
