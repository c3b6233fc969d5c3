#include "hdlss/cli/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <toml.hpp>

#include "hdlss/model_json.hpp"

namespace hdlss::cli {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void bad(const toml::source_region& where, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (where.begin.line) os << ':' << where.begin.line;
    os << ": " << msg;
    throw Error(ErrorKind::Configuration, os.str());
  }

  void only_keys(const toml::table& t, const std::string& name,
                 std::initializer_list<std::string_view> allowed) const {
    for (auto&& [k, v] : t) {
      if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end())
        bad(k.source(), "unknown key '" + std::string(k.str()) + "' in " + name);
    }
  }

  const toml::table* table(const toml::table& parent, std::string_view key,
                           const std::string& name) const {
    const toml::node* n = parent.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) bad(n->source(), name + " must be a table");
    return n->as_table();
  }

  std::uint64_t uint(const toml::node& n, const std::string& name) const {
    const auto v = n.value_exact<std::int64_t>();
    if (!v || *v < 0) bad(n.source(), name + " must be a non-negative integer");
    return static_cast<std::uint64_t>(*v);
  }

  double real(const toml::node& n, const std::string& name) const {
    if (!n.is_number()) bad(n.source(), name + " must be a number");
    return *n.value<double>();
  }

  std::string text(const toml::node& n, const std::string& name) const {
    const auto v = n.value_exact<std::string>();
    if (!v) bad(n.source(), name + " must be a string");
    return *v;
  }

  bool flag(const toml::node& n, const std::string& name) const {
    const auto v = n.value_exact<bool>();
    if (!v) bad(n.source(), name + " must be true or false");
    return *v;
  }

  const toml::array& array(const toml::node& n, const std::string& name) const {
    if (!n.is_array()) bad(n.source(), name + " must be a list");
    return *n.as_array();
  }

  std::vector<std::size_t> uints(const toml::node& n, const std::string& name) const {
    std::vector<std::size_t> out;
    for (const auto& e : array(n, name)) out.push_back(uint(e, name + " entries"));
    return out;
  }

  std::vector<std::string> texts(const toml::node& n, const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& e : array(n, name)) out.push_back(text(e, name + " entries"));
    return out;
  }

  json to_json(const toml::node& n, const std::string& name) const {
    if (const auto* t = n.as_table()) {
      json obj = json::object();
      for (auto&& [k, v] : *t) obj[std::string(k.str())] = to_json(v, name + "." + std::string(k.str()));
      return obj;
    }
    if (const auto* a = n.as_array()) {
      json arr = json::array();
      for (std::size_t i = 0; i < a->size(); ++i)
        arr.push_back(to_json((*a)[i], name + "[" + std::to_string(i) + "]"));
      return arr;
    }
    if (auto v = n.value_exact<std::int64_t>()) return *v;
    if (auto v = n.value_exact<double>()) return *v;
    if (auto v = n.value_exact<bool>()) return *v;
    if (auto v = n.value_exact<std::string>()) return *v;
    bad(n.source(), name + ": unsupported value type");
  }

 private:
  std::string source_;
};

CovarianceModel read_model(const Reader& r, const toml::table& root, const toml::table& m) {
  r.only_keys(m, "[model]", {"family", "mixing", "params"});
  const toml::node* fam = m.get("family");
  if (!fam) r.bad(m.source(), "[model] needs a family");
  json doc{{"family", r.text(*fam, "model.family")}, {"params", json::object()}};
  if (const toml::node* mix = m.get("mixing")) doc["mixing"] = r.text(*mix, "model.mixing");
  if (const toml::node* p = m.get("params")) {
    if (!p->is_table()) r.bad(p->source(), "model.params must be a table");
    doc["params"] = r.to_json(*p, "model.params");
  }
  try {
    return model_from_json(doc);
  } catch (const Error& e) {
    // Messages start with a path such as "params.alpha:" or
    // "single_spike.alpha"; point at that node when it exists.
    const std::string msg = e.what();
    std::string head = msg.substr(0, msg.find(' '));
    if (!head.empty() && head.back() == ':') head.pop_back();
    toml::source_region where = m.source();
    std::vector<std::string> candidates{"model." + head};
    if (const auto dot = head.find('.'); dot != std::string::npos)
      candidates.push_back("model.params." + head.substr(dot + 1));
    for (const auto& path : candidates) {
      if (auto node = root.at_path(path)) {
        where = node.node()->source();
        break;
      }
    }
    r.bad(where, "model." + msg);
  }
}

}  // namespace

std::string_view to_string(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Text: return "text";
  }
  return "unknown";
}

OutputFormat format_from_string(std::string_view name) {
  for (auto f : {OutputFormat::Csv, OutputFormat::Json, OutputFormat::Text})
    if (to_string(f) == name) return f;
  throw Error(ErrorKind::Configuration, "unknown output format '" + std::string(name) + "'");
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ':' << e.source().begin.line << ':' << e.source().begin.column << ": "
       << e.description();
    throw Error(ErrorKind::Configuration, os.str());
  }
  const Reader r(source);
  r.only_keys(root, "the top level", {"name", "model", "noise", "plan", "thresholds", "run"});

  RunConfig c;
  if (const toml::node* n = root.get("name")) c.name = r.text(*n, "name");

  const toml::table* model = r.table(root, "model", "[model]");
  if (!model) r.bad(root.source(), "missing [model] table");
  c.plan.model = read_model(r, root, *model);

  if (const toml::table* noise = r.table(root, "noise", "[noise]")) {
    r.only_keys(*noise, "[noise]", {"law", "sigma"});
    try {
      if (const toml::node* n = noise->get("law"))
        c.plan.noise.law = noise_law_from_string(r.text(*n, "noise.law"));
      if (const toml::node* n = noise->get("sigma")) c.plan.noise.sigma = r.real(*n, "noise.sigma");
      c.plan.noise.validate();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Configuration) throw;
      r.bad(noise->source(), std::string("noise: ") + e.what());
    }
  }

  const toml::table* plan = r.table(root, "plan", "[plan]");
  if (!plan) r.bad(root.source(), "missing [plan] table");
  r.only_keys(*plan, "[plan]",
              {"n", "d_grid", "replicates", "metrics", "tracked", "tracked_groups", "k", "ambient"});
  auto& p = c.plan;
  if (const toml::node* n = plan->get("n")) {
    p.n_grid = n->is_array() ? r.uints(*n, "plan.n") : std::vector<std::size_t>{r.uint(*n, "plan.n")};
  } else {
    r.bad(plan->source(), "[plan] needs n");
  }
  if (const toml::node* n = plan->get("d_grid")) p.d_grid = r.uints(*n, "plan.d_grid");
  else r.bad(plan->source(), "[plan] needs d_grid");
  if (const toml::node* n = plan->get("replicates")) p.replicates = r.uint(*n, "plan.replicates");
  if (const toml::node* n = plan->get("metrics")) {
    p.metrics.clear();
    for (const auto& name : r.texts(*n, "plan.metrics")) {
      try {
        p.metrics.insert(metric_from_string(name));
      } catch (const Error& e) {
        r.bad(n->source(), std::string("plan.metrics: ") + e.what());
      }
    }
  }
  if (const toml::node* n = plan->get("tracked")) p.tracked = r.uints(*n, "plan.tracked");
  if (const toml::node* n = plan->get("tracked_groups"))
    for (const auto& g : r.array(*n, "plan.tracked_groups"))
      p.tracked_groups.push_back(r.uints(g, "plan.tracked_groups entries"));
  if (const toml::node* n = plan->get("k")) c.k = r.uint(*n, "plan.k");
  if (const toml::node* n = plan->get("ambient")) p.ambient = r.flag(*n, "plan.ambient");

  if (const toml::table* th = r.table(root, "thresholds", "[thresholds]")) {
    r.only_keys(*th, "[thresholds]",
                {"zero_ceiling_deg", "right_angle_floor_deg", "flat_band_deg", "eigen_ratio_band",
                 "tail_tolerance", "dual_deviation_ceiling"});
    auto& t = p.thresholds;
    const std::pair<const char*, double*> fields[] = {
        {"zero_ceiling_deg", &t.zero_ceiling_deg},
        {"right_angle_floor_deg", &t.right_angle_floor_deg},
        {"flat_band_deg", &t.flat_band_deg},
        {"eigen_ratio_band", &t.eigen_ratio_band},
        {"tail_tolerance", &t.tail_tolerance},
        {"dual_deviation_ceiling", &t.dual_deviation_ceiling}};
    for (const auto& [key, slot] : fields)
      if (const toml::node* n = th->get(key)) *slot = r.real(*n, std::string("thresholds.") + key);
  }

  if (const toml::table* run = r.table(root, "run", "[run]")) {
    r.only_keys(*run, "[run]", {"seed", "jobs", "out", "formats"});
    if (const toml::node* n = run->get("seed")) p.seed.master_seed = r.uint(*n, "run.seed");
    if (const toml::node* n = run->get("jobs")) p.jobs = r.uint(*n, "run.jobs");
    if (const toml::node* n = run->get("out")) c.out_dir = r.text(*n, "run.out");
    if (const toml::node* n = run->get("formats")) {
      c.formats.clear();
      for (const auto& f : r.texts(*n, "run.formats")) {
        try {
          c.formats.insert(format_from_string(f));
        } catch (const Error& e) {
          r.bad(n->source(), e.what());
        }
      }
    }
  }

  if (c.k < 1) r.bad(plan->source(), "plan.k must be >= 1");
  try {
    p.validate();
  } catch (const Error& e) {
    r.bad(plan->source(), std::string("[plan]: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Configuration, path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

namespace {

toml::array uint_array(const std::vector<std::size_t>& v) {
  toml::array a;
  for (std::size_t x : v) a.push_back(static_cast<std::int64_t>(x));
  return a;
}

std::unique_ptr<toml::node> from_json(const json& j) {
  if (j.is_object()) {
    auto t = std::make_unique<toml::table>();
    for (const auto& [k, v] : j.items()) t->insert(k, std::move(*from_json(v)));
    return t;
  }
  if (j.is_array()) {
    auto a = std::make_unique<toml::array>();
    for (const auto& v : j) a->push_back(std::move(*from_json(v)));
    return a;
  }
  if (j.is_boolean()) return std::make_unique<toml::value<bool>>(j.get<bool>());
  if (j.is_number_integer()) return std::make_unique<toml::value<std::int64_t>>(j.get<std::int64_t>());
  if (j.is_number()) return std::make_unique<toml::value<double>>(j.get<double>());
  return std::make_unique<toml::value<std::string>>(j.get<std::string>());
}

}  // namespace

std::string dump_config(const RunConfig& c) {
  const auto& p = c.plan;
  const json mj = model_to_json(p.model);

  toml::table model{{"family", mj.at("family").get<std::string>()},
                    {"mixing", mj.at("mixing").get<std::string>()}};
  model.insert("params", std::move(*from_json(mj.at("params"))));

  toml::array metrics;
  for (Metric m : p.metrics) metrics.push_back(std::string(to_string(m)));
  toml::array groups;
  for (const auto& g : p.tracked_groups) groups.push_back(uint_array(g));

  toml::table plan{{"d_grid", uint_array(p.d_grid)},
                   {"replicates", static_cast<std::int64_t>(p.replicates)},
                   {"metrics", std::move(metrics)},
                   {"k", static_cast<std::int64_t>(c.k)},
                   {"ambient", p.ambient}};
  if (p.n_grid.size() == 1) plan.insert("n", static_cast<std::int64_t>(p.n_grid.front()));
  else plan.insert("n", uint_array(p.n_grid));
  if (!p.tracked.empty()) plan.insert("tracked", uint_array(p.tracked));
  if (!groups.empty()) plan.insert("tracked_groups", std::move(groups));

  const auto& t = p.thresholds;
  toml::table thresholds{{"zero_ceiling_deg", t.zero_ceiling_deg},
                         {"right_angle_floor_deg", t.right_angle_floor_deg},
                         {"flat_band_deg", t.flat_band_deg},
                         {"eigen_ratio_band", t.eigen_ratio_band},
                         {"tail_tolerance", t.tail_tolerance},
                         {"dual_deviation_ceiling", t.dual_deviation_ceiling}};

  toml::array formats;
  for (OutputFormat f : c.formats) formats.push_back(std::string(to_string(f)));
  toml::table run{{"seed", static_cast<std::int64_t>(p.seed.master_seed)},
                  {"jobs", static_cast<std::int64_t>(p.jobs)},
                  {"out", c.out_dir.string()},
                  {"formats", std::move(formats)}};

  toml::table root{{"model", std::move(model)},
                   {"noise", toml::table{{"law", std::string(to_string(p.noise.law))},
                                         {"sigma", p.noise.sigma}}},
                   {"plan", std::move(plan)},
                   {"thresholds", std::move(thresholds)},
                   {"run", std::move(run)}};
  if (!c.name.empty()) root.insert("name", c.name);
  std::ostringstream os;
  os << root << '\n';
  return os.str();
}

}  // namespace hdlss::cli
