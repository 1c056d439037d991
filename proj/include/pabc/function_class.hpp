#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pabc/mdp.hpp"

namespace pabc {

struct NamedTable {
    std::string name;
    Table table;
};

/// Ordered, nonempty list of same-shaped tables.
class TableClass {
public:
    TableClass() = default;
    TableClass(std::vector<NamedTable> members, TableRole role);

    std::size_t size() const { return tables_.size(); }
    bool empty() const { return tables_.empty(); }
    const Table& operator[](std::size_t i) const { return tables_.at(i); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    std::span<const Table> tables() const { return tables_; }
    const Shape& shape() const { return shape_; }
    /// Index of the first member equal to `t` within `tolerance` (max-abs), or size().
    std::size_t find(const Table& t, double tolerance = 0.0) const;

protected:
    std::vector<std::string> names_;
    std::vector<Table> tables_;
    Shape shape_;
};

/// Value-function class F with cached per-member gaps.
class FunctionClass : public TableClass {
public:
    FunctionClass() = default;
    explicit FunctionClass(std::vector<NamedTable> members, double tie_tolerance = 1e-9);

    double gap(std::size_t i) const { return gaps_.at(i); }
    double class_gap() const;
    double tie_tolerance() const { return tie_tolerance_; }

    FunctionClass subset(std::span<const std::size_t> indices) const;

private:
    std::vector<double> gaps_;
    double tie_tolerance_ = 1e-9;
};

/// Weight class W.
class WeightClass : public TableClass {
public:
    WeightClass() = default;
    explicit WeightClass(std::vector<NamedTable> members);

    /// max |w_h(x, a)| over members, timesteps and entries.
    double bound_C() const;

    WeightClass subset(std::span<const std::size_t> indices) const;
};

/// Raised when a selection stage leaves no candidate. `what()` names the
/// stage and carries the per-member diagnostics.
class EmptyVersionSpaceError : public std::runtime_error {
public:
    enum class Stage { prescreen, feasibility };
    EmptyVersionSpaceError(Stage stage, const std::string& details);
    Stage stage() const { return stage_; }

private:
    Stage stage_;
};

struct Prescreened {
    FunctionClass kept;
    std::vector<std::size_t> indices;  ///< positions of the kept members in the input class
};

/// Members with gap(f) >= c_gap. Throws EmptyVersionSpaceError listing every
/// member's gap when none survive, std::invalid_argument when c_gap < 0.
Prescreened prescreen(const FunctionClass& F, double c_gap);

struct MisspecResult {
    double value = 0.0;
    std::size_t argmin = 0;
    std::vector<double> per_member;  ///< the inner max for each member
};

/// min_w max_{f,h} |E_{d^D_h}[w_h (f_h - T_h f_{h+1})] - E_{d*_h}[f_h - T_h f_{h+1}]|
MisspecResult eps_W(const FunctionClass& F, const WeightClass& W, const LayeredMdp& mdp, const Table& data_dist);

/// min_f max_{w,h} |E_{d^D_h}[w_h (f_h - T_h f_{h+1})]| + |f_0(x_0, pi_f(x_0)) - v*|
MisspecResult eps_F(const FunctionClass& F, const WeightClass& W, const LayeredMdp& mdp, const Table& data_dist);

/// min_f max_h ||f_h - Q*_h||_inf
MisspecResult eps_F_inf(const FunctionClass& F, const LayeredMdp& mdp);

struct RegularityEntry {
    std::size_t member = 0;
    std::size_t h = 0;
    bool nonnegative = true;
    double expectation = 0.0;  ///< E_{d^D_h}[w_h]
    bool normalized = true;
};

struct RegularityReport {
    std::vector<RegularityEntry> entries;
    bool passed() const;
    std::vector<bool> member_passed(std::size_t num_members) const;
};

/// Per member and timestep: w >= 0 and E_{d^D_h}[w_h] = 1 within `tolerance`.
RegularityReport regularity_check(const WeightClass& W, const Table& data_dist, double tolerance = 1e-9);

/// Entries outside [0, H - h]; one line per offending member and timestep.
std::vector<std::string> value_range_violations(const FunctionClass& F);

}  // namespace pabc
