// Command-line driver: simulate, solve, partition.

#include "bosim/error.hpp"
#include "bosim/io/deck.hpp"
#include "bosim/io/report.hpp"
#include "bosim/linalg/matrix_market.hpp"
#include "bosim/precond/quasi_impes.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

using namespace bosim;

namespace {

enum Exit { Ok = 0, Usage = 1, Input = 2, Diverged = 3 };

struct SimulateArgs {
    std::string deck;
    int workers = 0;
    std::string out = "out";
    double until = -1.0;
};

struct SolveArgs {
    std::string matrix, labeling, rhs;
    std::string precond = "ras", solver = "gmres";
    int restart = 30, fixed = 0, maxit = 1000, workers = 1;
    double tol = 1e-6;
    bool decouple = false;
};

struct PartitionArgs {
    std::string deck;
    int workers = 1;
    bool report = false;
};

int run_simulate(const SimulateArgs& a)
{
    const SimDeck deck = parse_deck_file(a.deck);
    SimInput in = to_sim_input(deck);
    const int workers = a.workers > 0 ? a.workers : in.workers;
    auto pool = std::make_shared<WorkerPool>(workers);
    const Model model(in.grid, in.rock, in.fluid, in.wells, in.dual, pool);
    Simulator sim(model, in.initial_state(model), in.newton, in.steps);

    std::vector<double> times = in.report_times;
    if (a.until >= 0.0) {
        const double cap = a.until * units::day;
        std::erase_if(times, [&](double t) { return t > cap; });
        if (times.empty() || times.back() < cap)
            times.push_back(cap);
    }

    RunReport run = RunReport::for_model(model);
    std::printf("%s: %lld active cells, %d wells, %d workers\n", a.deck.c_str(),
                static_cast<long long>(model.num_active()), model.num_wells(), workers);
    const auto t0 = std::chrono::steady_clock::now();
    int newton = 0, linear = 0, written = 0;
    auto write_vtk_at = [&](int k) {
        write_vtk((std::filesystem::path(a.out) / "vtk" / ("step_" + std::to_string(k) + ".vtk")).string(), in.grid,
                  model, sim.state(), k);
    };
    try {
        if (deck.vtk_every > 0)
            write_vtk_at(0);
        for (std::size_t k = 0; k < times.size(); ++k) {
            while (sim.time() < times[k] - 1e-9 * times[k]) {
                const StepReport& r = sim.step(times[k]);
                run.record(model, sim.state(), r);
                newton += r.newton_iterations;
                linear += r.linear_iterations;
            }
            std::printf("t = %10.3f d  steps %4zu  newton %5d  linear %6d  avg p %10.2f psi\n",
                        sim.time() / units::day, run.steps.size(), newton, linear,
                        average_pressure(model, sim.state()) / units::psi);
            if (deck.vtk_every > 0 && (k + 1) % static_cast<std::size_t>(deck.vtk_every) == 0) {
                write_vtk_at(static_cast<int>(k) + 1);
                ++written;
            }
        }
    } catch (const NonConvergence& e) {
        write_csv_reports(a.out, run);
        std::fprintf(stderr, "error: %s\n", e.what());
        return Diverged;
    }
    write_csv_reports(a.out, run);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("done: %zu steps, %d newton, %d linear, %.2f s; reports in %s\n", run.steps.size(), newton, linear,
                wall, a.out.c_str());
    return Ok;
}

std::vector<Index> group_aligned_offsets(const BlockLabeling& l, int workers)
{
    auto off = Layout::even_offsets(l.size(), workers);
    for (std::size_t w = 1; w + 1 < off.size(); ++w) {
        Index o = std::max(off[w], off[w - 1]);
        while (o < l.size() && o > 0 && l.group[static_cast<std::size_t>(o)] >= 0 &&
               l.group[static_cast<std::size_t>(o)] == l.group[static_cast<std::size_t>(o - 1)])
            ++o;
        off[w] = o;
    }
    return off;
}

int run_solve(const SolveArgs& a)
{
    const SparseMatrix g = read_matrix_market_file(a.matrix);
    if (g.rows != g.cols)
        throw InvalidInput("matrix must be square");
    BlockLabeling labeling = BlockLabeling::all_pressure(g.rows);
    if (!a.labeling.empty()) {
        std::ifstream in(a.labeling);
        if (!in)
            throw IoError("cannot open labeling file '" + a.labeling + "'");
        labeling = read_labeling(in);
        if (labeling.size() != g.rows)
            throw InvalidInput("labeling size does not match the matrix");
    }
    labeling.validate();

    auto pool = std::make_shared<WorkerPool>(a.workers);
    const CsrMatrix mat = CsrMatrix::from_global(pool, g, group_aligned_offsets(labeling, a.workers));
    DistVector b(mat.layout_ptr());
    if (!a.rhs.empty()) {
        std::ifstream in(a.rhs);
        if (!in)
            throw IoError("cannot open right-hand side '" + a.rhs + "'");
        const auto v = read_mm_vector(in, a.rhs);
        if (static_cast<Index>(v.size()) != g.rows)
            throw InvalidInput("right-hand side length does not match the matrix");
        b.scatter(v);
    } else {
        DistVector ones(mat.layout_ptr(), 1.0);
        spmv(mat, ones, b);
    }

    SolverConfig cfg;
    cfg.method = parse_krylov_method(a.solver);
    cfg.restart = a.restart;
    cfg.tol = a.tol;
    cfg.max_iterations = std::max(a.maxit, a.fixed);
    cfg.fixed_iterations = a.fixed;
    cfg.validate();

    const auto t0 = std::chrono::steady_clock::now();
    const CsrMatrix* sys = &mat;
    const DistVector* rhs = &b;
    DecoupledSystem dec;
    if (a.decouple) {
        dec = quasi_impes_decouple(mat, b, labeling);
        sys = &dec.a;
        rhs = &dec.b;
    }
    const auto m = make_preconditioner(parse_precond_kind(a.precond), *sys, labeling);
    const auto t1 = std::chrono::steady_clock::now();
    DistVector x(sys->layout_ptr());
    const SolveResult r = krylov_solve(*sys, *rhs, x, cfg, m.get());
    const auto t2 = std::chrono::steady_clock::now();

    std::printf("matrix %s: %lld rows, %zu nonzeros, %d workers\n", a.matrix.c_str(), static_cast<long long>(g.rows),
                g.val.size(), a.workers);
    std::printf("solver %s  precond %s\n", a.solver.c_str(), a.precond.c_str());
    std::printf("iterations %d\n", r.iterations);
    std::printf("relative_residual %.6e\n", r.relative_residual);
    std::printf("converged %s\n", r.converged ? "yes" : "no");
    std::printf("setup_s %.4f  solve_s %.4f\n", std::chrono::duration<double>(t1 - t0).count(),
                std::chrono::duration<double>(t2 - t1).count());
    return r.converged || a.fixed > 0 ? Ok : Diverged;
}

int run_partition(const PartitionArgs& a)
{
    const SimDeck deck = parse_deck_file(a.deck);
    const SimInput in = to_sim_input(deck);
    const Grid& g = in.grid;
    std::vector<char> include(static_cast<std::size_t>(g.num_cells()));
    for (Index c = 0; c < g.num_cells(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        include[k] = in.rock.poro[k] > 0.0 && (!in.dual.enabled || in.dual.poro_f[k] > 0.0);
    }
    const Partition p = partition_grid(g, include, a.workers);
    const GhostPlan plan = build_ghost_plan(g, p);

    Index cut = 0;
    for (Index c = 0; c < g.num_cells(); ++c) {
        const int o = p.owner[static_cast<std::size_t>(c)];
        if (o < 0)
            continue;
        for (int f : {1, 3, 5}) {
            const Index n = g.cell(c).neighbor[static_cast<std::size_t>(f)];
            if (n >= 0 && p.owner[static_cast<std::size_t>(n)] >= 0 && p.owner[static_cast<std::size_t>(n)] != o)
                ++cut;
        }
    }
    std::size_t mx = 0, total = 0;
    for (const auto& cells : p.cells) {
        mx = std::max(mx, cells.size());
        total += cells.size();
    }
    const double imbalance = total ? static_cast<double>(mx) * a.workers / static_cast<double>(total) : 1.0;
    std::printf("grid %d x %d x %d, %zu active cells, %d workers\n", g.nx(), g.ny(), g.nz(), total, a.workers);
    std::printf("imbalance %.4f  cut_faces %lld  ghost_cells %lld\n", imbalance, static_cast<long long>(cut),
                static_cast<long long>(plan.total_received()));
    if (a.report) {
        std::printf("%6s %10s %10s %10s\n", "worker", "cells", "ghosts", "neighbors");
        for (int w = 0; w < a.workers; ++w) {
            const auto& recv = plan.receives[static_cast<std::size_t>(w)];
            Index ghosts = 0;
            for (const auto& l : recv)
                ghosts += static_cast<Index>(l.cells.size());
            std::printf("%6d %10zu %10lld %10zu\n", w, p.cells[static_cast<std::size_t>(w)].size(),
                        static_cast<long long>(ghosts), recv.size());
        }
    }
    return Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"bosim: black-oil and two-phase reservoir simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Run a deck");
    s->add_option("deck", sim.deck, "Input deck")->required();
    s->add_option("--workers", sim.workers, "Worker threads (default: deck WORKERS)")->check(CLI::PositiveNumber);
    s->add_option("--out", sim.out, "Output directory")->capture_default_str();
    s->add_option("--until", sim.until, "Stop time in days")->check(CLI::NonNegativeNumber);

    SolveArgs sol;
    auto* v = app.add_subcommand("solve", "Solve A x = b from a Matrix Market file");
    v->add_option("matrix", sol.matrix, "Matrix Market file")->required();
    v->add_option("--labeling", sol.labeling, "Unknown labeling sidecar");
    v->add_option("--rhs", sol.rhs, "Right-hand side (Matrix Market array); default A * ones");
    v->add_option("--precond", sol.precond, "Preconditioner")
        ->check(CLI::IsMember({"none", "ras", "cpr-fpf", "ilu0", "amg"}))
        ->capture_default_str();
    v->add_option("--solver", sol.solver, "Krylov method")
        ->check(CLI::IsMember({"gmres", "bicgstab", "orthomin"}))
        ->capture_default_str();
    v->add_option("--restart", sol.restart, "GMRES restart length")->check(CLI::PositiveNumber)->capture_default_str();
    v->add_option("--fixed-iters", sol.fixed, "Run exactly N iterations")->check(CLI::PositiveNumber);
    v->add_option("--tol", sol.tol, "Relative residual tolerance")->capture_default_str();
    v->add_option("--maxit", sol.maxit, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    v->add_option("--workers", sol.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    v->add_flag("--decouple", sol.decouple, "Apply Quasi-IMPES decoupling first");

    PartitionArgs part;
    auto* p = app.add_subcommand("partition", "Partition statistics for a deck");
    p->add_option("deck", part.deck, "Input deck")->required();
    p->add_option("--workers", part.workers, "Number of workers")->required()->check(CLI::PositiveNumber);
    p->add_flag("--report", part.report, "Per-worker table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Usage;
    }

    try {
        if (s->parsed())
            return run_simulate(sim);
        if (v->parsed())
            return run_solve(sol);
        return run_partition(part);
    } catch (const NonConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Diverged;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Input;
    }
}
