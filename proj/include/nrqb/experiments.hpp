// experiments.hpp — declarative parameter sweeps and the figure datasets.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nrqb/integrator.hpp"
#include "nrqb/io.hpp"
#include "nrqb/model.hpp"

namespace nrqb {

enum class Spacing { Linear, Log };
enum class SweepModel { Effective, Full, Both };
enum class Evaluation { Trajectory, Steady };
enum class PointStatus { Ok, EpInfeasible, Unstable, NrInfeasible, Failed };

std::string to_string(Spacing s);
std::string to_string(SweepModel m);
std::string to_string(Evaluation e);
std::string to_string(PointStatus s);
SweepModel sweep_model_from_string(const std::string& s);

/// One swept variable: a SystemParams field name or "r" (κ_b = r·κ_a).
/// Either min/max/count/spacing or an explicit value list.
struct SweepAxis {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 2;
    Spacing spacing = Spacing::Linear;
    std::vector<double> explicit_values;

    std::vector<double> values() const;
    std::size_t size() const;
};

struct SweepOutputs {
    bool e_a = false;
    bool e_b = true;
    bool eta = false;
    bool power = false;
    bool trajectory = false;
};

struct SweepSpec {
    SystemParams base;
    std::vector<SweepAxis> axes;  // at most two; empty → a single point
    double t_end = 200.0;
    std::size_t samples = 2001;
    SweepOutputs outputs;
    SweepModel model = SweepModel::Effective;
    Evaluation evaluation = Evaluation::Trajectory;
    bool nonreciprocal_lock = false;
    bool ep_lock = false;
    IntegratorOptions integrator;
    unsigned threads = 1;  // 0 → hardware concurrency

    /// Throws InvalidParameter.
    void validate() const;
};

struct SweepRecord {
    std::vector<double> point;  // axis values, axis order
    double J = 0.0;             // coupling actually used
    double phi = 0.0;
    PointStatus status = PointStatus::Ok;
    std::string message;
    std::vector<double> scalars;               // SweepResult::scalar_columns
    std::vector<double> times;                 // trajectory output only
    std::vector<std::vector<double>> series;   // SweepResult::series_columns × times
};

struct SweepResult {
    std::vector<std::string> axis_names;
    std::vector<std::string> scalar_columns;
    std::vector<std::string> series_columns;
    bool long_format = false;
    std::vector<SweepRecord> records;

    bool all_ok() const;
    /// Row-major table: one row per point, or per (point, time) for
    /// trajectory output; failed points get a single NaN row.
    Dataset table(const std::string& name = "sweep") const;
};

/// Evaluates every grid point independently; failures are recorded in the
/// record status and never abort the sweep. Output order is row-major over
/// the axes whatever the thread count.
SweepResult run_sweep(const SweepSpec& spec);

/// Applies an axis value ("r" or a SystemParams field) to `p`.
void apply_axis_value(SystemParams& p, const std::string& name, double value);

struct FigureOptions {
    SweepModel model = SweepModel::Effective;
    unsigned threads = 1;
    IntegratorOptions integrator;
};

std::vector<std::string> figure_names();

/// `name` is one of fig2a..fig2d, fig3a..fig3f, fig4a, fig4b.
Dataset figure(const std::string& name, const FigureOptions& opts = {});
Dataset figure2(char variant, const FigureOptions& opts = {});
Dataset figure3(char variant, const FigureOptions& opts = {});
Dataset figure4(char variant, const FigureOptions& opts = {});

}  // namespace nrqb
