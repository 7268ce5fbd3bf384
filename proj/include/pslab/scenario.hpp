#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pslab/metrics.hpp"
#include "pslab/optimizer.hpp"
#include "pslab/simulation.hpp"

namespace pslab {

/// How the point-source initial condition inside the cells is chosen.
struct ICRecipe {
    enum class Kind { Zero, Constant, Explicit, Option, Continuity } kind = Kind::Zero;
    double background = 0.0;  // environment level C
    int option = 1;           // optimizer option 1..6 for Kind::Option
    double p0 = 0.0;          // Kind::Explicit
    double t0 = 1.0;
};

struct Scenario {
    std::string name;
    std::string description;
    SimConfig config;
    ICRecipe recipe;
    FluxRecovery recovery = FluxRecovery::Consistent;
    std::optional<OptimResult> optimizer;  // filled by resolve_ic
};

/// A scenario to run together with the output subdirectory it owns ("" = top level).
struct Job {
    std::string subdir;
    Scenario scenario;
};

/// Built-in names: single, two-near, two-far, ten, d-sweep, nonzero-C.
std::vector<std::string> builtin_names();
std::string builtin_description(const std::string& name);

/// Cell layout of a built-in (sweeps use the single-cell layout).
DomainSpec builtin_domain(const std::string& name);

/// Expands a scenario name into jobs. Grammar: a built-in (or `single-cell`)
/// followed by `-`-separated modifiers:
///   D<v> dt<v> T<v> h<v>    simulation parameters
///   zero | const            zero or constant extension
///   C<v>                    environment level C
///   gauss | opt<k>          Gaussian extension via optimizer option k (default 1)
///   cont<C>                 Gaussian extension under the continuity constraint
/// Throws InvalidInput for unknown names or modifiers.
std::vector<Job> resolve_name(const std::string& name);

/// Key/value configuration with sections (`[section]`, `key = value`, `#` comments).
using ConfigMap = std::map<std::string, std::string>;  // "section.key" -> value
ConfigMap parse_config(std::istream& is);
ConfigMap read_config_file(const std::string& path);

/// Builds jobs from a config: `scenario.name` (optional) supplies the base,
/// remaining keys override it.
std::vector<Job> resolve_config(const ConfigMap& cfg);

/// Applies overrides from a config map (or command-line flags using the same keys).
void apply_overrides(Scenario& s, const ConfigMap& overrides);

/// Turns the recipe into SimConfig initial-condition fields, running the
/// optimizer when needed.
void resolve_ic(Scenario& s);

/// Writes a config that reproduces `s` exactly (explicit p0, t0 at 17 digits),
/// followed by informational sections ignored on re-read.
void write_meta(std::ostream& os, const Scenario& s, const MeshPair* pair, const ComparisonResult* result,
                const std::string& status);

/// `[initial_condition]` section holding an optimized pair; loadable with --config.
void write_ic_recipe(std::ostream& os, const ObjectiveSpec& spec, const FluxParams& fp, const OptimResult& r);

}  // namespace pslab
