#include "pabc/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace pabc::io {

namespace fs = std::filesystem;

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw FormatError("expected a number, got \"" + s + "\"");
    }
    if (!j.is_number()) throw FormatError("expected a number");
    return j.get<double>();
}

namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::pair<std::size_t, std::size_t> state_index(const LayeredMdp& mdp, const std::string& name) {
    auto s = mdp.find_state(name);
    if (!s) throw FormatError("unknown state '" + name + "'");
    return *s;
}

std::size_t action_index(const LayeredMdp& mdp, std::size_t h, std::size_t x, const std::string& name) {
    auto a = mdp.find_action(h, x, name);
    if (!a) throw FormatError("unknown action '" + name + "' at state '" + mdp.layers[h][x] + "'");
    return *a;
}

}  // namespace

json mdp_to_json(const LayeredMdp& mdp) {
    json j;
    j["horizon"] = mdp.horizon;
    j["layers"] = mdp.layers;
    json actions = json::object(), transitions = json::object(), rewards = json::object();
    for (std::size_t h = 0; h < mdp.horizon; ++h)
        for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
            const auto& s = mdp.layers[h][x];
            actions[s] = mdp.actions[h][x];
            json t = json::object(), r = json::object();
            for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) {
                const auto& an = mdp.actions[h][x][a];
                json row = json::object();
                for (std::size_t y = 0; y < mdp.num_states(h + 1); ++y)
                    if (mdp.transitions[h][x][a][y] != 0.0) row[mdp.layers[h + 1][y]] = mdp.transitions[h][x][a][y];
                t[an] = row;
                r[an] = mdp.rewards[h][x][a];
            }
            transitions[s] = t;
            rewards[s] = r;
        }
    j["actions"] = actions;
    j["transitions"] = transitions;
    j["rewards"] = rewards;
    j["initial_state"] = mdp.layers.at(0).at(mdp.initial_state);
    return j;
}

LayeredMdp mdp_from_json(const json& j) {
    try {
        LayeredMdp m;
        m.horizon = field(j, "horizon").get<std::size_t>();
        m.layers = field(j, "layers").get<std::vector<std::vector<std::string>>>();
        if (m.layers.size() != m.horizon + 1) throw FormatError("'layers' must list horizon + 1 layers");
        const json& acts = field(j, "actions");
        const json& trans = field(j, "transitions");
        const json& rews = field(j, "rewards");
        m.actions.resize(m.horizon);
        m.transitions.resize(m.horizon);
        m.rewards.resize(m.horizon);
        for (std::size_t h = 0; h < m.horizon; ++h)
            for (std::size_t x = 0; x < m.layers[h].size(); ++x) {
                const auto& s = m.layers[h][x];
                if (!acts.contains(s)) throw FormatError("no actions listed for state '" + s + "'");
                auto names = acts.at(s).get<std::vector<std::string>>();
                std::vector<std::vector<double>> rows;
                std::vector<double> rewards;
                for (const auto& an : names) {
                    std::vector<double> row(m.layers[h + 1].size(), 0.0);
                    const json& tj = field(field(trans, s.c_str()), an.c_str());
                    for (auto it = tj.begin(); it != tj.end(); ++it) {
                        auto pos = std::find(m.layers[h + 1].begin(), m.layers[h + 1].end(), it.key());
                        if (pos == m.layers[h + 1].end())
                            throw FormatError("transition from '" + s + "' targets '" + it.key() +
                                              "', which is not in the next layer");
                        row[static_cast<std::size_t>(pos - m.layers[h + 1].begin())] = it.value().get<double>();
                    }
                    rows.push_back(std::move(row));
                    rewards.push_back(field(field(rews, s.c_str()), an.c_str()).get<double>());
                }
                m.actions[h].push_back(std::move(names));
                m.transitions[h].push_back(std::move(rows));
                m.rewards[h].push_back(std::move(rewards));
            }
        const auto init = field(j, "initial_state").get<std::string>();
        auto pos = std::find(m.layers[0].begin(), m.layers[0].end(), init);
        if (pos == m.layers[0].end()) throw FormatError("initial state '" + init + "' is not in layer 0");
        m.initial_state = static_cast<std::size_t>(pos - m.layers[0].begin());
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed MDP: ") + e.what());
    }
}

LayeredMdp load_mdp(const fs::path& path) { return mdp_from_json(read_json(path)); }

json table_to_json(const LayeredMdp& mdp, const Table& t) {
    json values = json::object();
    for (std::size_t h = 0; h < t.horizon(); ++h)
        for (std::size_t x = 0; x < t.num_states(h); ++x) {
            json row = json::object();
            for (std::size_t a = 0; a < t.num_actions(h, x); ++a) row[mdp.actions[h][x][a]] = t(h, x, a);
            values[mdp.layers[h][x]] = row;
        }
    return {{"role", to_string(t.role())}, {"values", values}};
}

Table table_from_json(const LayeredMdp& mdp, const json& j, std::optional<TableRole> role) {
    try {
        TableRole r = role.value_or(TableRole::value);
        if (j.contains("role")) r = table_role_from_string(j.at("role").get<std::string>());
        if (role && r != *role) throw FormatError("table role '" + to_string(r) + "' where '" + to_string(*role) + "' is expected");
        Table t(mdp.shape(), r);
        const json& values = field(j, "values");
        for (auto it = values.begin(); it != values.end(); ++it) {
            const auto [h, x] = state_index(mdp, it.key());
            if (h >= mdp.horizon) throw FormatError("terminal state '" + it.key() + "' cannot carry table values");
            for (auto a = it.value().begin(); a != it.value().end(); ++a)
                t(h, x, action_index(mdp, h, x, a.key())) = number_from(a.value());
        }
        return t;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed table: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

json policy_to_json(const LayeredMdp& mdp, const Policy& pi) {
    json j = json::object();
    if (pi.is_deterministic()) {
        json acts = json::object();
        for (std::size_t h = 0; h < mdp.horizon; ++h)
            for (std::size_t x = 0; x < mdp.num_states(h); ++x) acts[mdp.layers[h][x]] = mdp.actions[h][x][pi.action(h, x)];
        j["actions"] = acts;
    } else {
        json probs = json::object();
        for (std::size_t h = 0; h < mdp.horizon; ++h)
            for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
                json row = json::object();
                for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a) row[mdp.actions[h][x][a]] = pi.prob(h, x, a);
                probs[mdp.layers[h][x]] = row;
            }
        j["probabilities"] = probs;
    }
    if (pi.tie_rule()) j["tie_rule"] = to_string(*pi.tie_rule());
    return j;
}

Policy policy_from_json(const LayeredMdp& mdp, const json& j) {
    try {
        if (j.contains("actions")) {
            std::vector<std::vector<std::size_t>> acts(mdp.horizon);
            for (std::size_t h = 0; h < mdp.horizon; ++h) {
                acts[h].resize(mdp.num_states(h));
                for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
                    const auto& s = mdp.layers[h][x];
                    acts[h][x] = action_index(mdp, h, x, field(j.at("actions"), s.c_str()).get<std::string>());
                }
            }
            Policy p = Policy::deterministic(std::move(acts), mdp.shape());
            if (j.contains("tie_rule")) p.set_tie_rule(tie_rule_from_string(j.at("tie_rule").get<std::string>()));
            return p;
        }
        std::vector<std::vector<std::vector<double>>> probs(mdp.horizon);
        for (std::size_t h = 0; h < mdp.horizon; ++h)
            for (std::size_t x = 0; x < mdp.num_states(h); ++x) {
                std::vector<double> row(mdp.num_actions(h, x), 0.0);
                const json& r = field(field(j, "probabilities"), mdp.layers[h][x].c_str());
                for (auto a = r.begin(); a != r.end(); ++a) row[action_index(mdp, h, x, a.key())] = a.value().get<double>();
                probs[h].push_back(std::move(row));
            }
        return Policy::stochastic(std::move(probs));
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed policy: ") + e.what());
    }
}

json members_to_json(const LayeredMdp& mdp, const TableClass& c) {
    json arr = json::array();
    for (std::size_t i = 0; i < c.size(); ++i)
        arr.push_back({{"name", c.name(i)}, {"values", table_to_json(mdp, c[i]).at("values")}});
    return arr;
}

std::vector<NamedTable> members_from_json(const LayeredMdp& mdp, const json& j, TableRole role) {
    if (!j.is_array()) throw FormatError("'members' must be an array");
    std::vector<NamedTable> out;
    for (const auto& m : j) {
        json t = {{"role", to_string(role)}, {"values", field(m, "values")}};
        out.push_back({field(m, "name").get<std::string>(), table_from_json(mdp, t, role)});
    }
    return out;
}

namespace {

std::pair<LayeredMdp, std::vector<NamedTable>> load_class_file(const fs::path& path, const std::string& kind,
                                                               TableRole role) {
    const json j = read_json(path);
    const auto k = field(j, "kind").get<std::string>();
    if (k != kind) throw FormatError(path.string() + ": class kind is '" + k + "', expected '" + kind + "'");
    fs::path mdp_path = field(j, "mdp").get<std::string>();
    if (mdp_path.is_relative()) mdp_path = path.parent_path() / mdp_path;
    LayeredMdp mdp = load_mdp(mdp_path);
    auto members = members_from_json(mdp, field(j, "members"), role);
    return {std::move(mdp), std::move(members)};
}

}  // namespace

FunctionClass load_function_class(const fs::path& path, LayeredMdp* mdp_out) {
    auto [mdp, members] = load_class_file(path, "function", TableRole::value);
    if (mdp_out) *mdp_out = mdp;
    return FunctionClass(std::move(members));
}

WeightClass load_weight_class(const fs::path& path, LayeredMdp* mdp_out) {
    auto [mdp, members] = load_class_file(path, "weight", TableRole::weight);
    if (mdp_out) *mdp_out = mdp;
    return WeightClass(std::move(members));
}

json dataset_to_json(const Dataset& d, DatasetFormat format) {
    json j;
    j["format"] = format == DatasetFormat::tuples ? "tuples" : "columnar";
    j["seed"] = d.seed;
    j["n"] = d.n;
    json steps = json::array();
    for (const auto& tuples : d.timesteps) {
        if (format == DatasetFormat::tuples) {
            json arr = json::array();
            for (const auto& t : tuples) arr.push_back({t.state, t.action, t.reward, t.next_state});
            steps.push_back(std::move(arr));
        } else {
            std::vector<std::size_t> xs, as, ys;
            std::vector<double> rs;
            for (const auto& t : tuples) {
                xs.push_back(t.state);
                as.push_back(t.action);
                rs.push_back(t.reward);
                ys.push_back(t.next_state);
            }
            steps.push_back({{"x", xs}, {"a", as}, {"r", rs}, {"next", ys}});
        }
    }
    j["timesteps"] = steps;
    return j;
}

Dataset dataset_from_json(const json& j) {
    try {
        Dataset d;
        d.seed = field(j, "seed").get<std::uint64_t>();
        d.n = field(j, "n").get<std::size_t>();
        const auto format = field(j, "format").get<std::string>();
        for (const auto& step : field(j, "timesteps")) {
            std::vector<Transition> tuples;
            if (format == "tuples") {
                for (const auto& t : step)
                    tuples.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<double>(),
                                      t.at(3).get<std::size_t>()});
            } else if (format == "columnar") {
                const auto xs = field(step, "x").get<std::vector<std::size_t>>();
                const auto as = field(step, "a").get<std::vector<std::size_t>>();
                const auto rs = field(step, "r").get<std::vector<double>>();
                const auto ys = field(step, "next").get<std::vector<std::size_t>>();
                if (as.size() != xs.size() || rs.size() != xs.size() || ys.size() != xs.size())
                    throw FormatError("columnar dataset columns differ in length");
                for (std::size_t i = 0; i < xs.size(); ++i) tuples.push_back({xs[i], as[i], rs[i], ys[i]});
            } else {
                throw FormatError("unknown dataset format '" + format + "'");
            }
            d.timesteps.push_back(std::move(tuples));
        }
        return d;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed dataset: ") + e.what());
    }
}

json selection_to_json(const LayeredMdp& mdp, const Selection& s) {
    const bool constrained = s.variant == Variant::pabc || s.variant == Variant::population_pabc;
    json j;
    j["variant"] = to_string(s.variant);
    j["index"] = s.index;
    j["name"] = s.name;
    j["estimate"] = number(s.estimate);
    if (constrained) j["alpha"] = number(s.alpha);
    j["c_gap"] = number(s.c_gap);
    j["n"] = s.n;
    j["policy"] = policy_to_json(mdp, s.policy);
    json members = json::array();
    for (std::size_t i = 0; i < s.member_names.size(); ++i)
        members.push_back({{"name", s.member_names[i]},
                           {"gap", number(s.gaps[i])},
                           {"prescreened", static_cast<bool>(s.prescreened[i])},
                           {"initial_value", number(s.initial_values[i])},
                           {"max_abs_loss", number(s.max_abs_loss[i])},
                           {"feasible", static_cast<bool>(s.feasible[i])},
                           {"objective", number(s.objective[i])}});
    j["members"] = members;
    json matrix = json::array();
    for (std::size_t i = 0; i < s.losses.size(); ++i)
        for (std::size_t w = 0; w < s.losses[i].size(); ++w)
            for (std::size_t h = 0; h < s.losses[i][w].size(); ++h) {
                json e = {{"f", s.member_names[i]}, {"w", s.weight_names[w]}, {"h", h}, {"loss", number(s.losses[i][w][h])}};
                if (constrained) e["pass"] = within_alpha(std::abs(s.losses[i][w][h]), s.alpha);
                matrix.push_back(std::move(e));
            }
    j["feasibility"] = matrix;
    return j;
}

json transcript_to_json(const LayeredMdp& mdp, const OaTranscript& t) {
    json j;
    j["initial_gap_guess"] = number(t.initial_gap_guess);
    j["C"] = number(t.C);
    j["n"] = t.n;
    j["stopped"] = t.stopped;
    j["cap_reached"] = t.cap_reached;
    j["total_online_samples"] = t.total_online_samples;
    if (t.final_member) j["final_member"] = *t.final_member;
    if (t.final_policy) j["final_policy"] = policy_to_json(mdp, *t.final_policy);
    json its = json::array();
    for (const auto& it : t.iterations) {
        json e = {{"t", it.t},
                  {"gap_guess", number(it.gap_guess)},
                  {"iota", number(it.iota)},
                  {"eps", number(it.eps)},
                  {"alpha_value", number(it.alpha_value)},
                  {"alpha_policy", number(it.alpha_policy)},
                  {"rollouts", it.rollouts},
                  {"samples", it.samples},
                  {"stop", it.stop}};
        e["v_star_hat"] = it.v_star_hat ? number(*it.v_star_hat) : json(nullptr);
        e["v_hat"] = it.v_hat ? number(*it.v_hat) : json(nullptr);
        if (it.member) {
            e["member"] = *it.member;
            e["member_name"] = it.member_name;
            e["policy"] = policy_to_json(mdp, it.policy);
        }
        if (!it.note.empty()) e["note"] = it.note;
        its.push_back(std::move(e));
    }
    j["iterations"] = its;
    return j;
}

json annotations_to_json(const Annotations& a) {
    json gaps = json::array();
    for (double g : a.member_gaps) gaps.push_back(number(g));
    return {{"v_star", number(a.v_star)},
            {"gap_q_star", number(a.gap_q_star)},
            {"concentrability", number(a.concentrability)},
            {"w_star_exists", a.w_star_exists},
            {"q_star_in_F", a.q_star_in_F},
            {"w_star_in_W", a.w_star_in_W},
            {"member_gaps", gaps},
            {"notes", a.notes}};
}

namespace {

json greedy_to_json(const LayeredMdp& mdp, const GreedyRule& g) {
    json j = {{"rule", to_string(g.rule)}, {"tolerance", g.tolerance}};
    json pref = json::object();
    for (const auto& [hx, a] : g.preferred) pref[mdp.layers[hx.first][hx.second]] = mdp.actions[hx.first][hx.second][a];
    j["preferred"] = pref;
    return j;
}

GreedyRule greedy_from_json(const LayeredMdp& mdp, const json& j) {
    GreedyRule g;
    if (j.contains("rule")) g.rule = tie_rule_from_string(j.at("rule").get<std::string>());
    if (j.contains("tolerance")) g.tolerance = j.at("tolerance").get<double>();
    if (j.contains("preferred"))
        for (auto it = j.at("preferred").begin(); it != j.at("preferred").end(); ++it) {
            const auto [h, x] = state_index(mdp, it.key());
            g.preferred[{h, x}] = action_index(mdp, h, x, it.value().get<std::string>());
        }
    return g;
}

}  // namespace

json instance_to_json(const NamedInstance& inst) {
    json j;
    j["name"] = inst.name;
    j["mdp"] = mdp_to_json(inst.mdp);
    j["data_distribution"] = table_to_json(inst.mdp, inst.data_dist);
    j["F"] = members_to_json(inst.mdp, inst.F);
    j["W"] = members_to_json(inst.mdp, inst.W);
    j["tie_tolerance"] = inst.F.tie_tolerance();
    j["greedy"] = greedy_to_json(inst.mdp, inst.greedy);
    json mt = {{"tolerance", inst.member_tie.tolerance}};
    if (inst.member_tie.preferred) mt["preferred"] = inst.F.name(*inst.member_tie.preferred);
    j["member_tie"] = mt;
    j["annotations"] = annotations_to_json(inst.annotations);
    return j;
}

NamedInstance instance_from_json(const json& j) {
    try {
        NamedInstance inst;
        inst.name = j.value("name", std::string("instance"));
        inst.mdp = mdp_from_json(field(j, "mdp"));
        require_valid(inst.mdp);
        inst.data_dist = table_from_json(inst.mdp, field(j, "data_distribution"), TableRole::data_distribution);
        const double tol = j.value("tie_tolerance", 1e-9);
        inst.F = FunctionClass(members_from_json(inst.mdp, field(j, "F"), TableRole::value), tol);
        inst.W = WeightClass(members_from_json(inst.mdp, field(j, "W"), TableRole::weight));
        if (j.contains("greedy")) inst.greedy = greedy_from_json(inst.mdp, j.at("greedy"));
        if (j.contains("member_tie")) {
            const json& mt = j.at("member_tie");
            inst.member_tie.tolerance = mt.value("tolerance", 1e-12);
            if (mt.contains("preferred")) {
                const auto name = mt.at("preferred").get<std::string>();
                for (std::size_t i = 0; i < inst.F.size(); ++i)
                    if (inst.F.name(i) == name) inst.member_tie.preferred = i;
                if (!inst.member_tie.preferred) throw FormatError("preferred member '" + name + "' is not in F");
            }
        }
        inst.annotations = annotate(inst);
        return inst;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed instance: ") + e.what());
    }
}

NamedInstance load_instance(const fs::path& path) { return instance_from_json(read_json(path)); }

void export_instance(const NamedInstance& inst, const fs::path& dir) {
    fs::create_directories(dir);
    write_json(dir / "mdp.json", mdp_to_json(inst.mdp));
    write_json(dir / "data_distribution.json", table_to_json(inst.mdp, inst.data_dist));
    write_json(dir / "F.json", {{"kind", "function"}, {"mdp", "mdp.json"}, {"members", members_to_json(inst.mdp, inst.F)}});
    write_json(dir / "W.json", {{"kind", "weight"}, {"mdp", "mdp.json"}, {"members", members_to_json(inst.mdp, inst.W)}});
    write_json(dir / "instance.json", instance_to_json(inst));
}

}  // namespace pabc::io
