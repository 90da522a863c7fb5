#include "vtoldock/config.hpp"

#include <set>
#include <sstream>

#include "json.hpp"

#include "vtoldock/errors.hpp"
#include "vtoldock/io.hpp"

namespace vtoldock {

using nlohmann::json;

const char* to_string(AgentKind agent) {
  switch (agent) {
    case AgentKind::dqn: return "dqn";
    case AgentKind::double_dqn: return "double";
    case AgentKind::dueling: return "dueling";
    case AgentKind::ppo: return "ppo";
  }
  return "unknown";
}

AgentKind parse_agent(const std::string& name) {
  if (name == "dqn") return AgentKind::dqn;
  if (name == "double") return AgentKind::double_dqn;
  if (name == "dueling") return AgentKind::dueling;
  if (name == "ppo") return AgentKind::ppo;
  throw ConfigError("invalid agent '" + name + "' (expected dqn, double, dueling or ppo)");
}

void EvalSettings::validate() const {
  std::ostringstream bad;
  if (episodes < 1) bad << " evaluation.episodes=" << episodes;
  if (!(success_threshold > 0.0)) bad << " evaluation.success_threshold=" << success_threshold;
  if (timing_passes < 1) bad << " evaluation.timing_passes=" << timing_passes;
  if (!bad.str().empty()) throw ConfigError("invalid evaluation settings:" + bad.str());
}

void RunConfig::validate() const {
  // Collect every sub-config failure so one run reports all of them.
  std::vector<std::string> problems;
  auto check = [&problems](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      problems.emplace_back(e.what());
    }
  };
  check([&] { env.validate(); });
  check([&] { evaluation.validate(); });
  if (agent == AgentKind::ppo)
    check([&] { ppo.validate(); });
  else
    check([&] { dqn_for_agent().validate(); });
  std::ostringstream bad;
  if (episodes < 1) bad << " episodes=" << episodes;
  if (seeds.empty()) bad << " seeds=[]";
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    bad << " seeds (must be distinct)";
  if (output_dir.empty()) bad << " output_dir=\"\"";
  if (!bad.str().empty()) problems.push_back("invalid run settings:" + bad.str());
  if (problems.empty()) return;
  std::string msg = problems.front();
  for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
  throw ConfigError(msg);
}

agents::DqnConfig RunConfig::dqn_for_agent() const {
  agents::DqnConfig c = dqn;
  switch (agent) {
    case AgentKind::double_dqn: c.variant = agents::DqnVariant::double_dqn; break;
    case AgentKind::dueling: c.variant = agents::DqnVariant::dueling; break;
    default: c.variant = agents::DqnVariant::dqn; break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON mapping. One visitor describes every field so that writing and
// reading cannot drift apart.

namespace {

class Writer {
 public:
  explicit Writer(json& root) : node_(&root) {}
  template <class T>
  void field(const char* key, const T& value) { (*node_)[key] = value; }
  template <class Fn>
  void object(const char* key, Fn&& fn) {
    json* parent = node_;
    node_ = &(*parent)[key];
    *node_ = json::object();
    fn();
    node_ = parent;
  }

 private:
  json* node_;
};

class Reader {
 public:
  explicit Reader(const json& root) : node_(&root) { check_keys(); }

  template <class T>
  void field(const char* key, T& value) {
    seen_.back().insert(key);
    auto it = node_->find(key);
    if (it == node_->end()) return;
    try {
      value = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("invalid config field '" + path(key) + "': wrong type");
    }
  }

  template <class Fn>
  void object(const char* key, Fn&& fn) {
    seen_.back().insert(key);
    auto it = node_->find(key);
    if (it == node_->end()) return;
    if (!it->is_object()) throw ConfigError("invalid config field '" + path(key) + "': expected an object");
    const json* parent = node_;
    prefix_.push_back(key);
    node_ = &*it;
    check_keys();
    fn();
    finish();
    prefix_.pop_back();
    node_ = parent;
  }

  void finish() {
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!seen_.back().count(it.key()))
        throw ConfigError("unknown config field '" + path(it.key()) + "'");
    seen_.pop_back();
  }

 private:
  void check_keys() {
    if (!node_->is_object()) throw ConfigError("config root must be a JSON object");
    seen_.emplace_back();
  }
  std::string path(const std::string& key) const {
    std::string p;
    for (const auto& s : prefix_) p += s + ".";
    return p + key;
  }

  const json* node_;
  std::vector<std::string> prefix_;
  std::vector<std::set<std::string>> seen_;
};

template <class V, class Agent, class Path>
void visit(V& v, Agent& agent, int& episodes, std::vector<std::uint64_t>& seeds,
           Path& output_dir, env::EnvConfig& e, agents::DqnConfig& d,
           agents::PpoConfig& p, EvalSettings& ev) {
  v.field("agent", agent);
  v.field("episodes", episodes);
  v.field("seeds", seeds);
  v.field("output_dir", output_dir);
  v.object("env", [&] {
    v.field("dt", e.dt);
    v.field("substeps", e.substeps);
    v.field("max_steps", e.max_steps);
    v.field("delta_u", e.delta_u);
    v.field("u_min", e.u_min);
    v.field("u_max", e.u_max);
    v.field("e_max", e.e_max);
    v.field("v_limit", e.v_limit);
    v.object("uav", [&] {
      v.field("mass", e.uav.mass);
      v.field("k_fdz", e.uav.k_fdz);
      v.field("g", e.uav.g);
      v.field("h0", e.uav.h0);
    });
    v.object("reward", [&] {
      v.field("k1", e.reward.k1);
      v.field("k2", e.reward.k2);
      v.field("v_max", e.reward.v_max);
      v.field("h_c", e.reward.h_c);
      v.field("v_td", e.reward.v_td);
    });
    v.object("wave", [&] {
      v.field("rescale", e.wave.rescale);
      v.field("significant_height", e.wave.significant_height);
      v.object("spectrum", [&] {
        auto& s = e.wave.spectrum;
        v.field("alpha_w", s.alpha_w);
        v.field("k_w", s.k_w);
        v.field("f_p", s.f_p);
        v.field("gamma_w", s.gamma_w);
        v.field("sigma_low", s.sigma_low);
        v.field("sigma_high", s.sigma_high);
        v.field("g", s.g);
      });
      v.object("grid", [&] {
        v.field("f_min", e.wave.grid.f_min);
        v.field("f_max", e.wave.grid.f_max);
        v.field("n_bins", e.wave.grid.n_bins);
      });
    });
  });
  v.object("dqn", [&] {
    v.field("lr", d.lr);
    v.field("batch_size", d.batch_size);
    v.field("gamma", d.gamma);
    v.field("capacity", d.capacity);
    v.field("sync_every", d.sync_every);
    v.field("soft_tau", d.soft_tau);
    v.field("grad_clip", d.grad_clip);
    v.field("warm_start", d.warm_start);
    v.field("hidden", d.hidden);
    v.field("input_scale", d.input_scale);
    v.object("epsilon", [&] {
      v.field("eps0", d.epsilon.eps0);
      v.field("eps_f", d.epsilon.eps_f);
      v.field("decay_rate", d.epsilon.decay_rate);
    });
  });
  v.object("ppo", [&] {
    v.field("lr_actor", p.lr_actor);
    v.field("lr_critic", p.lr_critic);
    v.field("gamma", p.gamma);
    v.field("gae_lambda", p.gae_lambda);
    v.field("clip", p.clip);
    v.field("horizon", p.horizon);
    v.field("epochs", p.epochs);
    v.field("minibatch_size", p.minibatch_size);
    v.field("capacity", p.capacity);
    v.field("entropy_coef", p.entropy_coef);
    v.field("normalize_advantages", p.normalize_advantages);
    v.field("init_log_std", p.init_log_std);
    v.field("hidden", p.hidden);
    v.field("input_scale", p.input_scale);
  });
  v.object("evaluation", [&] {
    v.field("episodes", ev.episodes);
    v.field("seed", ev.seed);
    v.field("success_threshold", ev.success_threshold);
    v.field("timing_passes", ev.timing_passes);
  });
}

}  // namespace

std::string to_json(const RunConfig& config) {
  RunConfig c = config;
  std::string agent = to_string(c.agent);
  std::string out_dir = c.output_dir.generic_string();
  json root = json::object();
  Writer w(root);
  visit(w, agent, c.episodes, c.seeds, out_dir, c.env, c.dqn, c.ppo, c.evaluation);
  return root.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), e.byte);
  }
  RunConfig c;
  std::string agent = to_string(c.agent);
  std::string out_dir = c.output_dir.generic_string();
  Reader r(root);
  visit(r, agent, c.episodes, c.seeds, out_dir, c.env, c.dqn, c.ppo, c.evaluation);
  r.finish();
  c.agent = parse_agent(agent);
  c.output_dir = out_dir;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_file(path));
}

}  // namespace vtoldock
