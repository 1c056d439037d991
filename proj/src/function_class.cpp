#include "pabc/function_class.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pabc/data.hpp"
#include "pabc/dynamic_programming.hpp"

namespace pabc {

TableClass::TableClass(std::vector<NamedTable> members, TableRole role) {
    if (members.empty()) throw std::invalid_argument("a class needs at least one member");
    shape_ = members.front().table.shape();
    for (auto& m : members) {
        if (!m.table.same_shape(shape_))
            throw std::invalid_argument("class member '" + m.name + "' has a different shape");
        m.table.set_role(role);
        names_.push_back(std::move(m.name));
        tables_.push_back(std::move(m.table));
    }
}

std::size_t TableClass::find(const Table& t, double tolerance) const {
    for (std::size_t i = 0; i < tables_.size(); ++i) {
        if (!t.same_shape(shape_)) return size();
        double diff = 0.0;
        for (std::size_t h = 0; h < t.horizon(); ++h)
            for (std::size_t x = 0; x < t.num_states(h); ++x)
                for (std::size_t a = 0; a < t.num_actions(h, x); ++a)
                    diff = std::max(diff, std::abs(t(h, x, a) - tables_[i](h, x, a)));
        if (diff <= tolerance) return i;
    }
    return size();
}

FunctionClass::FunctionClass(std::vector<NamedTable> members, double tie_tolerance)
    : TableClass(std::move(members), TableRole::value), tie_tolerance_(tie_tolerance) {
    gaps_.reserve(tables_.size());
    for (const auto& f : tables_) gaps_.push_back(gap_of_function(f, tie_tolerance_));
}

double FunctionClass::class_gap() const {
    if (gaps_.empty()) throw std::invalid_argument("gap of an empty class is undefined");
    return *std::min_element(gaps_.begin(), gaps_.end());
}

FunctionClass FunctionClass::subset(std::span<const std::size_t> indices) const {
    std::vector<NamedTable> members;
    for (auto i : indices) members.push_back({names_.at(i), tables_.at(i)});
    return FunctionClass(std::move(members), tie_tolerance_);
}

WeightClass::WeightClass(std::vector<NamedTable> members) : TableClass(std::move(members), TableRole::weight) {}

double WeightClass::bound_C() const { return class_bound_C(tables_); }

WeightClass WeightClass::subset(std::span<const std::size_t> indices) const {
    std::vector<NamedTable> members;
    for (auto i : indices) members.push_back({names_.at(i), tables_.at(i)});
    return WeightClass(std::move(members));
}

namespace {

std::string stage_name(EmptyVersionSpaceError::Stage s) {
    return s == EmptyVersionSpaceError::Stage::prescreen ? "prescreening" : "feasibility";
}

}  // namespace

EmptyVersionSpaceError::EmptyVersionSpaceError(Stage stage, const std::string& details)
    : std::runtime_error("empty version space after " + stage_name(stage) + ": " + details), stage_(stage) {}

Prescreened prescreen(const FunctionClass& F, double c_gap) {
    if (!(c_gap >= 0.0)) throw std::invalid_argument("C_gap must be nonnegative");
    Prescreened out;
    for (std::size_t i = 0; i < F.size(); ++i)
        if (F.gap(i) >= c_gap) out.indices.push_back(i);
    if (out.indices.empty()) {
        std::ostringstream os;
        os << "no member has gap >= " << c_gap << " (";
        for (std::size_t i = 0; i < F.size(); ++i) os << (i ? ", " : "") << F.name(i) << ": " << F.gap(i);
        os << ")";
        throw EmptyVersionSpaceError(EmptyVersionSpaceError::Stage::prescreen, os.str());
    }
    out.kept = F.subset(out.indices);
    return out;
}

namespace {

struct OptimalQuantities {
    Table q_star;
    Table d_star;
    double v_star = 0.0;
};

OptimalQuantities optimal_quantities(const LayeredMdp& mdp) {
    OptimalQuantities o;
    o.q_star = optimal_q(mdp);
    const Policy pi_star = greedy_policy(o.q_star);
    o.d_star = occupancy(mdp, pi_star);
    const auto row = o.q_star.row(0, mdp.initial_state);
    o.v_star = *std::max_element(row.begin(), row.end());
    return o;
}

void require_class_shape(const TableClass& c, const LayeredMdp& mdp, const char* what) {
    if (c.empty()) throw std::invalid_argument(std::string(what) + " is empty");
    if (c.shape() != mdp.shape()) throw std::invalid_argument(std::string(what) + " does not match the MDP shape");
}

}  // namespace

MisspecResult eps_W(const FunctionClass& F, const WeightClass& W, const LayeredMdp& mdp, const Table& data_dist) {
    require_class_shape(F, mdp, "function class");
    require_class_shape(W, mdp, "weight class");
    const auto opt = optimal_quantities(mdp);
    std::vector<Table> residuals;
    for (const auto& f : F.tables()) residuals.push_back(bellman_residual(mdp, f));

    MisspecResult out;
    out.value = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < W.size(); ++j) {
        double worst = 0.0;
        for (const auto& r : residuals)
            for (std::size_t h = 0; h < mdp.horizon; ++h) {
                const double diff =
                    weighted_expectation(data_dist, W[j], r, h) - expectation(opt.d_star, r, h);
                worst = std::max(worst, std::abs(diff));
            }
        out.per_member.push_back(worst);
        if (worst < out.value) {
            out.value = worst;
            out.argmin = j;
        }
    }
    return out;
}

MisspecResult eps_F(const FunctionClass& F, const WeightClass& W, const LayeredMdp& mdp, const Table& data_dist) {
    require_class_shape(F, mdp, "function class");
    require_class_shape(W, mdp, "weight class");
    const auto opt = optimal_quantities(mdp);

    MisspecResult out;
    out.value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < F.size(); ++i) {
        const Table r = bellman_residual(mdp, F[i]);
        const auto row = F[i].row(0, mdp.initial_state);
        const double initial_term = std::abs(*std::max_element(row.begin(), row.end()) - opt.v_star);
        double worst = 0.0;
        for (const auto& w : W.tables())
            for (std::size_t h = 0; h < mdp.horizon; ++h)
                worst = std::max(worst, std::abs(weighted_expectation(data_dist, w, r, h)));
        worst += initial_term;
        out.per_member.push_back(worst);
        if (worst < out.value) {
            out.value = worst;
            out.argmin = i;
        }
    }
    return out;
}

MisspecResult eps_F_inf(const FunctionClass& F, const LayeredMdp& mdp) {
    require_class_shape(F, mdp, "function class");
    const Table q = optimal_q(mdp);
    MisspecResult out;
    out.value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < F.size(); ++i) {
        double worst = 0.0;
        for (std::size_t h = 0; h < mdp.horizon; ++h)
            for (std::size_t x = 0; x < mdp.num_states(h); ++x)
                for (std::size_t a = 0; a < mdp.num_actions(h, x); ++a)
                    worst = std::max(worst, std::abs(F[i](h, x, a) - q(h, x, a)));
        out.per_member.push_back(worst);
        if (worst < out.value) {
            out.value = worst;
            out.argmin = i;
        }
    }
    return out;
}

bool RegularityReport::passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.nonnegative && e.normalized; });
}

std::vector<bool> RegularityReport::member_passed(std::size_t num_members) const {
    std::vector<bool> ok(num_members, true);
    for (const auto& e : entries)
        if (!e.nonnegative || !e.normalized) ok.at(e.member) = false;
    return ok;
}

RegularityReport regularity_check(const WeightClass& W, const Table& data_dist, double tolerance) {
    if (!data_dist.same_shape(W.shape())) throw std::invalid_argument("regularity_check: shape mismatch");
    RegularityReport rep;
    for (std::size_t j = 0; j < W.size(); ++j)
        for (std::size_t h = 0; h < data_dist.horizon(); ++h) {
            RegularityEntry e;
            e.member = j;
            e.h = h;
            for (std::size_t x = 0; x < data_dist.num_states(h); ++x)
                for (double v : W[j].row(h, x))
                    if (v < 0.0) e.nonnegative = false;
            Table ones(W.shape(), TableRole::value, 1.0);
            e.expectation = weighted_expectation(data_dist, W[j], ones, h);
            e.normalized = std::abs(e.expectation - 1.0) <= tolerance;
            rep.entries.push_back(e);
        }
    return rep;
}

std::vector<std::string> value_range_violations(const FunctionClass& F) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < F.size(); ++i) {
        const auto& f = F[i];
        const double H = static_cast<double>(f.horizon());
        for (std::size_t h = 0; h < f.horizon(); ++h) {
            const double hi = H - static_cast<double>(h);
            bool bad = false;
            for (std::size_t x = 0; x < f.num_states(h) && !bad; ++x)
                for (double v : f.row(h, x))
                    if (!(v >= 0.0 && v <= hi)) bad = true;
            if (bad)
                out.push_back("member '" + F.name(i) + "' leaves [0, " + std::to_string(static_cast<int>(hi)) +
                              "] at timestep " + std::to_string(h));
        }
    }
    return out;
}

}  // namespace pabc
