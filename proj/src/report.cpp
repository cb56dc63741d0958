#include "bosim/io/report.hpp"

#include "bosim/error.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

namespace bosim {

namespace {

std::string num(double v)
{
    char buf[64];
    if (v == 0.0)
        v = 0.0; // drop the sign of -0
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
    return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream o(p);
    if (!o)
        throw IoError("cannot write '" + p.string() + "'");
    return o;
}

void finish(std::ofstream& o, const std::filesystem::path& p)
{
    o.flush();
    if (!o)
        throw IoError("write failed for '" + p.string() + "'");
}

} // namespace

RunReport RunReport::for_model(const Model& model)
{
    RunReport r;
    for (const auto& w : model.wells()) {
        r.well_names.push_back(w.name);
        r.well_types.push_back(w.type);
    }
    return r;
}

void RunReport::record(const Model& model, const ReservoirState& state, const StepReport& step)
{
    steps.push_back(step);
    avg_pressure.push_back(average_pressure(model, state));
}

double average_pressure(const Model& model, const ReservoirState& state)
{
    double pv = 0.0, sum = 0.0;
    for (Index m = 0; m < model.num_cells(); ++m) {
        const double v = model.volume(m) * model.porosity(m);
        pv += v;
        sum += v * state.p[static_cast<std::size_t>(m)];
    }
    return pv > 0.0 ? sum / pv : 0.0;
}

double water_cut(double qw, double qo)
{
    const double l = qw + qo;
    return l > 0.0 ? std::clamp(qw / l, 0.0, 1.0) : 0.0;
}

void write_csv_reports(const std::string& dir, const RunReport& run)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    const fs::path root(dir);

    const double liq = units::stb_per_day, gas = units::mscf_per_day;
    {
        const auto p = root / "wells.csv";
        auto o = open_out(p);
        o << "time_days,well,type,oil_rate_stbd,water_rate_stbd,gas_rate_mscfd,cum_oil_stb,cum_water_stb,"
             "cum_gas_mscf,bhp_psi,control,water_cut\n";
        const std::size_t nw = run.well_names.size();
        std::vector<std::array<double, 3>> cum(nw, {0.0, 0.0, 0.0});
        for (const auto& s : run.steps) {
            for (std::size_t w = 0; w < nw && w < s.well_rates.size(); ++w) {
                const bool inj = run.well_types[w] == WellType::Injector;
                const double sign = inj ? 1.0 : -1.0;
                const auto& q = s.well_rates[w];
                const double qo = sign * q.oil, qw = sign * q.water, qg = sign * q.gas;
                cum[w][0] += qo * s.dt;
                cum[w][1] += qw * s.dt;
                cum[w][2] += qg * s.dt;
                o << num(s.time / units::day) << ',' << csv_field(run.well_names[w]) << ','
                  << (inj ? "injector" : "producer") << ',' << num(qo / liq) << ',' << num(qw / liq) << ','
                  << num(qg / gas) << ',' << num(cum[w][0] / units::bbl) << ',' << num(cum[w][1] / units::bbl) << ','
                  << num(cum[w][2] / units::mscf) << ',' << num(s.bhp[w] / units::psi) << ','
                  << to_string(s.control[w]) << ',';
                if (!inj)
                    o << num(water_cut(std::max(qw, 0.0), std::max(qo, 0.0)));
                o << '\n';
            }
        }
        finish(o, p);
    }
    {
        const auto p = root / "steps.csv";
        auto o = open_out(p);
        o << "step,time_days,dt_days,newton_iterations,linear_iterations,cuts,resolves,mb_error_water,mb_error_oil,"
             "mb_error_gas,assembly_s,setup_s,solve_s,events\n";
        for (const auto& s : run.steps) {
            std::string ev;
            for (const auto& e : s.events)
                ev += (ev.empty() ? "" : "; ") + e;
            o << s.index << ',' << num(s.time / units::day) << ',' << num(s.dt / units::day) << ','
              << s.newton_iterations << ',' << s.linear_iterations << ',' << s.cuts << ',' << s.resolves << ','
              << num(s.mass_balance_error[0]) << ',' << num(s.mass_balance_error[1]) << ','
              << num(s.mass_balance_error[2]) << ',' << num(s.assembly_seconds) << ',' << num(s.setup_seconds) << ','
              << num(s.solve_seconds) << ',' << csv_field(ev) << '\n';
        }
        finish(o, p);
    }
    {
        const auto p = root / "field.csv";
        auto o = open_out(p);
        o << "time_days,avg_pressure_psi,oil_prod_stbd,water_prod_stbd,gas_prod_mscfd,water_inj_stbd,water_cut\n";
        for (std::size_t k = 0; k < run.steps.size(); ++k) {
            const auto& s = run.steps[k];
            double qo = 0.0, qw = 0.0, qg = 0.0, wi = 0.0;
            for (std::size_t w = 0; w < s.well_rates.size(); ++w) {
                const auto& q = s.well_rates[w];
                if (run.well_types[w] == WellType::Injector) {
                    wi += q.water;
                } else {
                    qo -= q.oil;
                    qw -= q.water;
                    qg -= q.gas;
                }
            }
            o << num(s.time / units::day) << ',' << num(run.avg_pressure[k] / units::psi) << ',' << num(qo / liq)
              << ',' << num(qw / liq) << ',' << num(qg / gas) << ',' << num(wi / liq) << ','
              << num(water_cut(std::max(qw, 0.0), std::max(qo, 0.0))) << '\n';
        }
        finish(o, p);
    }
}

void write_vtk(const std::string& path, const Grid& grid, const Model& model, const ReservoirState& state, int step)
{
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    auto o = open_out(p);
    const auto uniform = [](std::span<const double> d) {
        return std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); });
    };
    o << "# vtk DataFile Version 3.0\n";
    o << "bosim step " << step << " time_days " << num(state.time / units::day) << "\nASCII\n";
    o << (uniform(grid.dx()) && uniform(grid.dy()) && uniform(grid.dz()) ? "DATASET STRUCTURED_POINTS\n"
                                                                          : "DATASET RECTILINEAR_GRID\n");
    o << "DIMENSIONS " << grid.nx() + 1 << ' ' << grid.ny() + 1 << ' ' << grid.nz() + 1 << '\n';
    if (uniform(grid.dx()) && uniform(grid.dy()) && uniform(grid.dz())) {
        o << "ORIGIN 0 0 " << num(grid.top_depth()) << '\n';
        o << "SPACING " << num(grid.dx()[0]) << ' ' << num(grid.dy()[0]) << ' ' << num(grid.dz()[0]) << '\n';
    } else {
        auto coords = [&](const char* name, std::span<const double> d, double start) {
            o << name << ' ' << d.size() + 1 << " double\n" << num(start);
            double x = start;
            for (double v : d)
                o << ' ' << num(x += v);
            o << '\n';
        };
        coords("X_COORDINATES", grid.dx(), 0.0);
        coords("Y_COORDINATES", grid.dy(), 0.0);
        coords("Z_COORDINATES", grid.dz(), grid.top_depth());
    }
    const Index n = grid.num_cells();
    o << "CELL_DATA " << n << '\n';
    auto field = [&](const char* name, int continuum, auto get) {
        o << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (Index c = 0; c < n; ++c) {
            const Index m = model.model_cell(c, continuum);
            o << (m < 0 ? "0" : num(get(static_cast<std::size_t>(m)))) << '\n';
        }
    };
    auto write_set = [&](int k, const std::string& suffix) {
        field(("pressure_psi" + suffix).c_str(), k, [&](std::size_t m) { return state.p[m] / units::psi; });
        field(("sw" + suffix).c_str(), k, [&](std::size_t m) { return state.sw[m]; });
        field(("sg" + suffix).c_str(), k, [&](std::size_t m) { return state.sg(static_cast<Index>(m)); });
    };
    write_set(0, "");
    if (model.dual_porosity())
        write_set(1, "_matrix");
    field("active", 0, [](std::size_t) { return 1.0; });
    finish(o, p);
}

} // namespace bosim
