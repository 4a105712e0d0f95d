#include "nrqb/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "nrqb/config.hpp"
#include "nrqb/error.hpp"

namespace nrqb {

std::size_t Dataset::column(const std::string& col) const {
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] == col) return k;
    }
    throw std::out_of_range("dataset '" + name + "' has no column '" + col + "'");
}

std::vector<double> Dataset::values(const std::string& col) const {
    const std::size_t k = column(col);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const Dataset& d) {
    const bool with_status = !d.status.empty();
    if (with_status && d.status.size() != d.rows.size()) {
        throw DimensionMismatch("dataset status column has the wrong length");
    }
    for (std::size_t k = 0; k < d.columns.size(); ++k) {
        out << (k ? "," : "") << d.columns[k];
    }
    if (with_status) out << ",status";
    out << '\n';
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        const auto& row = d.rows[r];
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
        if (with_status) out << ',' << d.status[r];
        out << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
    const bool three = !t.states.empty() && t.states.front().modes() == 3;
    out << "t,re_a,im_a,re_b,im_b";
    if (three) out << ",re_c,im_c";
    out << ",n_aa,n_bb,re_n_ab,im_n_ab,e_a,e_b,eta,power\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        const MomentState& s = t.states[k];
        const auto f = [&out](double v) { out << ',' << format_double(v); };
        out << format_double(t.times[k]);
        for (Eigen::Index m = 0; m < s.first.size(); ++m) {
            f(s.first(m).real());
            f(s.first(m).imag());
        }
        f(s.second(0, 0).real());
        f(s.second(1, 1).real());
        f(s.second(0, 1).real());
        f(s.second(0, 1).imag());
        f(t.e_a[k]);
        f(t.e_b[k]);
        f(t.eta[k]);
        f(t.power[k]);
        out << '\n';
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_dataset(const std::filesystem::path& dir, const Dataset& d) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / (d.name + ".csv"), std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir / (d.name + ".csv")).string() + "'");
        write_csv(out, d);
    }
    nlohmann::json meta = d.meta;
    meta["name"] = d.name;
    meta["columns"] = d.columns;
    meta["rows"] = d.rows.size();
    if (!meta.contains("version")) meta["version"] = library_version();
    if (!meta.contains("timestamp")) meta["timestamp"] = utc_timestamp();
    write_text(dir / (d.name + ".meta.json"), meta.dump(2) + "\n");
}

nlohmann::json to_json(const SystemParams& p) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& name : field_names()) j[name] = get_field(p, name);
    return j;
}

nlohmann::json to_json(const EffectiveParams& e) {
    return {
        {"delta_a_p", e.delta_a_p},
        {"delta_b_p", e.delta_b_p},
        {"gamma_a_eff", e.gamma_a_eff},
        {"gamma_b_eff", e.gamma_b_eff},
        {"G", e.g_coh},
        {"Gamma", e.gamma_diss},
        {"J", e.J},
        {"J_plus", {e.j_plus.real(), e.j_plus.imag()}},
        {"J_minus", {e.j_minus.real(), e.j_minus.imag()}},
        {"lambda_a", e.lambda_a},
        {"lambda_b", e.lambda_b},
        {"phi", e.phi},
        {"epsilon", e.epsilon},
        {"omega_a", e.omega_a},
        {"omega_b", e.omega_b},
    };
}

nlohmann::json to_json(const IntegratorOptions& o) {
    return {
        {"method", o.method == StepMethod::DormandPrince45 ? "dopri5" : "rk4"},
        {"rtol", o.rtol},
        {"atol", o.atol},
        {"min_step", o.min_step},
        {"max_step", o.max_step},
        {"fixed_step", o.fixed_step},
    };
}

std::string library_version() {
#ifdef NRQB_VERSION
    return NRQB_VERSION;
#else
    return "0.0.0";
#endif
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace nrqb
