#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pabc/data.hpp"
#include "pabc/function_class.hpp"
#include "pabc/instances.hpp"
#include "pabc/mdp.hpp"
#include "pabc/online.hpp"
#include "pabc/solvers.hpp"

namespace pabc::io {

using nlohmann::json;

/// Raised for malformed files; the message names the offending field.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// Finite numbers as-is, infinities as "inf" / "-inf", NaN as null.
json number(double v);
double number_from(const json& j);

json mdp_to_json(const LayeredMdp& mdp);
LayeredMdp mdp_from_json(const json& j);
LayeredMdp load_mdp(const std::filesystem::path& path);

/// {"role": ..., "values": {state: {action: v}}}; missing entries are 0.
json table_to_json(const LayeredMdp& mdp, const Table& t);
Table table_from_json(const LayeredMdp& mdp, const json& j, std::optional<TableRole> role = std::nullopt);

/// {"actions": {state: action}} or {"probabilities": {state: {action: p}}}
json policy_to_json(const LayeredMdp& mdp, const Policy& pi);
Policy policy_from_json(const LayeredMdp& mdp, const json& j);

/// [{"name": ..., "values": {...}}, ...]
json members_to_json(const LayeredMdp& mdp, const TableClass& c);
std::vector<NamedTable> members_from_json(const LayeredMdp& mdp, const json& j, TableRole role);

/// Class file: {"kind": "function" | "weight", "mdp": path, "members": [...]}.
/// The MDP path is resolved relative to the class file.
FunctionClass load_function_class(const std::filesystem::path& path, LayeredMdp* mdp_out = nullptr);
WeightClass load_weight_class(const std::filesystem::path& path, LayeredMdp* mdp_out = nullptr);

enum class DatasetFormat { tuples, columnar };
/// Indices are layer-local. Tuples: [[x, a, r, x'], ...] per timestep.
/// Columnar: {"x": [...], "a": [...], "r": [...], "next": [...]} per timestep.
json dataset_to_json(const Dataset& d, DatasetFormat format = DatasetFormat::tuples);
Dataset dataset_from_json(const json& j);

json selection_to_json(const LayeredMdp& mdp, const Selection& s);
json transcript_to_json(const LayeredMdp& mdp, const OaTranscript& t);
json annotations_to_json(const Annotations& a);

/// Self-contained instance bundle: MDP, data distribution, classes, tie rules
/// and annotations. Loading recomputes the annotations.
json instance_to_json(const NamedInstance& inst);
NamedInstance instance_from_json(const json& j);
NamedInstance load_instance(const std::filesystem::path& path);

/// Writes mdp.json, data_distribution.json, F.json, W.json and instance.json.
void export_instance(const NamedInstance& inst, const std::filesystem::path& dir);

}  // namespace pabc::io
