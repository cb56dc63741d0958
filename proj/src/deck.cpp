#include "bosim/io/deck.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bosim {

namespace {

struct Token {
    std::string text;
    std::shared_ptr<const std::string> file;
    int line = 0, col = 0;
    bool quoted = false;
    bool line_start = false;
};

const std::set<std::string> flag_keywords{"TWOPHASE", "BLACKOIL", "DUALPORO", "DUALPERM", "END"};
const std::set<std::string> record_keywords{"WELSPECS", "COMPDAT", "WCONPROD", "WCONINJE"};
const std::set<std::string> payload_keywords{
    "DIMENS", "DX",     "DY",    "DZ",     "TOPS",   "PORO",      "PERMX",   "PERMY",    "PERMZ",  "ROCKC",
    "SWOF",   "SGOF",   "PVTO",  "OILUSAT", "PVTW",  "PVDG",      "DENSITY", "SIGMA",    "BLOCKDIMS",
    "FPORO",  "FPERMX", "FPERMY", "FPERMZ", "INIT",  "NEWTON",    "LINSOLVE", "TIMESTEP", "WORKERS",
    "TSTEP",  "ENDTIME", "VTKSTEPS", "INCLUDE"};

bool is_keyword(const std::string& s)
{
    return flag_keywords.count(s) || record_keywords.count(s) || payload_keywords.count(s);
}

std::vector<Token> tokenize(const std::string& text, const std::string& file)
{
    auto fname = std::make_shared<const std::string>(file);
    std::vector<Token> out;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        char q = 0;
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            if (q) {
                q = line[i] == q ? 0 : q;
            } else if (line[i] == '\'' || line[i] == '"') {
                q = line[i];
            } else if (line[i] == '-' && line[i + 1] == '-') {
                line.resize(i);
                break;
            }
        }
        bool first = true;
        std::size_t i = 0;
        while (i < line.size()) {
            const char c = line[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            Token t;
            t.file = fname;
            t.line = ln;
            t.col = static_cast<int>(i) + 1;
            t.line_start = first;
            first = false;
            if (c == '/') {
                t.text = "/";
                ++i;
            } else if (c == '\'' || c == '"') {
                const std::size_t close = line.find(c, i + 1);
                if (close == std::string::npos)
                    throw ParseError("unterminated quoted string", file, ln, t.col);
                t.text = line.substr(i + 1, close - i - 1);
                t.quoted = true;
                i = close + 1;
            } else {
                std::size_t j = i;
                while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '/')
                    ++j;
                t.text = line.substr(i, j - i);
                i = j;
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

[[noreturn]] void fail(const Token& t, const std::string& msg)
{
    throw ParseError(msg, *t.file, t.line, t.col);
}

double to_double(const Token& t)
{
    double v = 0.0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    if (!t.text.empty() && *b == '+')
        ++b;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e || t.quoted)
        fail(t, "malformed number '" + t.text + "'");
    return v;
}

int to_int(const Token& t)
{
    const double v = to_double(t);
    if (v != std::floor(v) || std::abs(v) > 2e9)
        fail(t, "expected an integer, got '" + t.text + "'");
    return static_cast<int>(v);
}

std::string upper(std::string s)
{
    for (char& c : s)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

/// A record item: a token, or a default (from `N*`).
struct Item {
    std::optional<Token> tok;
    Token where; // for diagnostics on defaults
};

using Record = std::vector<Item>;

class Parser {
public:
    Parser(std::vector<Token> toks, std::string file) : toks_(std::move(toks)), file_(std::move(file)) {}

    SimDeck run();

private:
    bool at_end() const { return pos_ >= toks_.size(); }
    const Token& last() const { return toks_[std::min(pos_, toks_.size()) - 1]; }

    Record read_record(const Token& kw);
    std::vector<Record> read_records(const Token& kw);
    std::vector<double> read_numbers(const Token& kw);
    void include(const Token& kw);

    std::vector<double> axis_array(const Token& kw, int axis);
    std::vector<double> cell_array(const Token& kw);
    template <std::size_t W>
    std::vector<std::array<double, W>> table(const Token& kw);
    void need_dims(const Token& kw) const;

    void keyword(const Token& kw);

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::string file_;
    int include_depth_ = 0;
    SimDeck d_;
    std::map<std::string, Token> seen_;
    double sched_time_ = 0.0;
    bool two_phase_ = false, done_ = false;
};

Record Parser::read_record(const Token& kw)
{
    Record r;
    for (;;) {
        if (at_end())
            fail(last(), "missing '/' terminator for " + kw.text);
        const Token& t = toks_[pos_];
        if (t.text == "/" && !t.quoted) {
            ++pos_;
            return r;
        }
        if (!t.quoted && t.line_start && is_keyword(upper(t.text)))
            fail(pos_ > 0 ? toks_[pos_ - 1] : t, "missing '/' terminator for " + kw.text);
        ++pos_;
        const auto star = t.quoted ? std::string::npos : t.text.find('*');
        if (star == std::string::npos) {
            r.push_back({t, t});
            continue;
        }
        Token count = t;
        count.text = t.text.substr(0, star);
        const int n = count.text.empty() ? 1 : to_int(count);
        if (n <= 0)
            fail(t, "repeat count must be positive");
        std::optional<Token> value;
        if (star + 1 < t.text.size()) {
            Token v = t;
            v.text = t.text.substr(star + 1);
            value = v;
        }
        for (int k = 0; k < n; ++k)
            r.push_back({value, t});
    }
}

std::vector<Record> Parser::read_records(const Token& kw)
{
    std::vector<Record> out;
    for (;;) {
        if (at_end())
            fail(last(), "missing terminating '/' for " + kw.text);
        Record r = read_record(kw);
        if (r.empty())
            return out;
        out.push_back(std::move(r));
    }
}

std::vector<double> Parser::read_numbers(const Token& kw)
{
    const Record r = read_record(kw);
    std::vector<double> v;
    v.reserve(r.size());
    for (const auto& it : r) {
        if (!it.tok)
            fail(it.where, "defaulted value not allowed in " + kw.text);
        v.push_back(to_double(*it.tok));
    }
    return v;
}

void Parser::need_dims(const Token& kw) const
{
    if (!seen_.count("DIMENS"))
        fail(kw, kw.text + " requires DIMENS first");
}

std::vector<double> Parser::axis_array(const Token& kw, int axis)
{
    need_dims(kw);
    const auto v = read_numbers(kw);
    const int n = d_.dims[static_cast<std::size_t>(axis)];
    if (static_cast<Index>(v.size()) == n)
        return v;
    if (static_cast<Index>(v.size()) != d_.num_cells())
        fail(kw, kw.text + ": expected " + std::to_string(n) + " or " + std::to_string(d_.num_cells()) + " values, got " +
                     std::to_string(v.size()));
    const int nx = d_.dims[0], ny = d_.dims[1];
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Index c = 0; c < d_.num_cells(); ++c) {
        const int ijk[3] = {static_cast<int>(c % nx), static_cast<int>((c / nx) % ny), static_cast<int>(c / (nx * ny))};
        const auto a = static_cast<std::size_t>(ijk[axis]);
        if (c == ijk[axis] * (axis == 0 ? 1 : axis == 1 ? nx : nx * ny))
            out[a] = v[static_cast<std::size_t>(c)];
        else if (v[static_cast<std::size_t>(c)] != out[a])
            fail(kw, kw.text + ": spacing must be constant along the other axes");
    }
    return out;
}

std::vector<double> Parser::cell_array(const Token& kw)
{
    need_dims(kw);
    auto v = read_numbers(kw);
    if (static_cast<Index>(v.size()) != d_.num_cells())
        fail(last(), kw.text + ": expected " + std::to_string(d_.num_cells()) + " values, got " + std::to_string(v.size()));
    return v;
}

template <std::size_t W>
std::vector<std::array<double, W>> Parser::table(const Token& kw)
{
    const auto v = read_numbers(kw);
    if (v.empty() || v.size() % W != 0)
        fail(last(), kw.text + ": rows need " + std::to_string(W) + " values each");
    std::vector<std::array<double, W>> rows(v.size() / W);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < W; ++c)
            rows[r][c] = v[r * W + c];
    return rows;
}

template <std::size_t N>
std::array<double, N> fixed(const Token& kw, const std::vector<double>& v, const Token& at)
{
    if (v.size() != N)
        fail(at, kw.text + ": expected " + std::to_string(N) + " values, got " + std::to_string(v.size()));
    std::array<double, N> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
}

void Parser::include(const Token& kw)
{
    const Record r = read_record(kw);
    if (r.size() != 1 || !r[0].tok)
        fail(kw, "INCLUDE takes one file name");
    const Token& name = *r[0].tok;
    if (++include_depth_ > 16)
        fail(name, "INCLUDE nested too deeply");
    std::filesystem::path p(name.text);
    if (p.is_relative())
        p = std::filesystem::path(*kw.file).parent_path() / p;
    std::ifstream in(p);
    if (!in)
        fail(name, "cannot open include file '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    auto inc = tokenize(ss.str(), p.string());
    toks_.insert(toks_.begin() + static_cast<std::ptrdiff_t>(pos_), inc.begin(), inc.end());
}

Phase parse_phase(const Item& it)
{
    if (!it.tok)
        fail(it.where, "phase required");
    const std::string s = upper(it.tok->text);
    if (s == "WATER" || s == "WAT")
        return Phase::Water;
    if (s == "GAS")
        return Phase::Gas;
    fail(*it.tok, "unknown injected phase '" + it.tok->text + "'");
}

void Parser::keyword(const Token& kw)
{
    const std::string& k = kw.text;
    auto nums = [&] { return read_numbers(kw); };
    if (k == "TWOPHASE" || k == "BLACKOIL") {
        if (seen_.count(k == "TWOPHASE" ? "BLACKOIL" : "TWOPHASE"))
            fail(kw, "TWOPHASE and BLACKOIL are exclusive");
        d_.black_oil = k == "BLACKOIL";
        two_phase_ = !d_.black_oil;
    } else if (k == "DUALPORO") {
        d_.dual_porosity = true;
    } else if (k == "DUALPERM") {
        d_.dual_permeability = true;
    } else if (k == "END") {
        done_ = true;
    } else if (k == "INCLUDE") {
        include(kw);
    } else if (k == "DIMENS") {
        const auto v = read_record(kw);
        if (v.size() != 3)
            fail(kw, "DIMENS needs nx ny nz");
        for (std::size_t a = 0; a < 3; ++a) {
            if (!v[a].tok)
                fail(v[a].where, "DIMENS values cannot be defaulted");
            d_.dims[a] = to_int(*v[a].tok);
            if (d_.dims[a] <= 0)
                fail(*v[a].tok, "grid dimensions must be positive");
        }
    } else if (k == "DX") {
        d_.dx = axis_array(kw, 0);
    } else if (k == "DY") {
        d_.dy = axis_array(kw, 1);
    } else if (k == "DZ") {
        d_.dz = axis_array(kw, 2);
    } else if (k == "TOPS") {
        need_dims(kw);
        const auto v = nums();
        if (v.size() != 1 && static_cast<Index>(v.size()) != static_cast<Index>(d_.dims[0]) * d_.dims[1])
            fail(last(), "TOPS: expected 1 or nx*ny values");
        if (std::any_of(v.begin(), v.end(), [&](double t) { return t != v[0]; }))
            fail(last(), "TOPS: only flat tops are supported");
        d_.tops = v[0];
    } else if (k == "PORO") {
        d_.poro = cell_array(kw);
    } else if (k == "PERMX") {
        d_.permx = cell_array(kw);
    } else if (k == "PERMY") {
        d_.permy = cell_array(kw);
    } else if (k == "PERMZ") {
        d_.permz = cell_array(kw);
    } else if (k == "FPORO") {
        d_.fporo = cell_array(kw);
    } else if (k == "FPERMX") {
        d_.fpermx = cell_array(kw);
    } else if (k == "FPERMY") {
        d_.fpermy = cell_array(kw);
    } else if (k == "FPERMZ") {
        d_.fpermz = cell_array(kw);
    } else if (k == "ROCKC") {
        const auto v = fixed<2>(kw, nums(), last());
        d_.rock_p_ref = v[0];
        d_.rock_c = v[1];
    } else if (k == "SWOF") {
        d_.swof = table<4>(kw);
    } else if (k == "SGOF") {
        d_.sgof = table<4>(kw);
    } else if (k == "PVTO") {
        d_.pvto = table<4>(kw);
    } else if (k == "OILUSAT") {
        d_.oil_usat = fixed<2>(kw, nums(), last());
    } else if (k == "PVTW") {
        d_.pvtw = fixed<4>(kw, nums(), last());
    } else if (k == "PVDG") {
        d_.pvdg = table<3>(kw);
    } else if (k == "DENSITY") {
        d_.density = fixed<3>(kw, nums(), last());
    } else if (k == "SIGMA") {
        d_.sigma = fixed<1>(kw, nums(), last())[0];
    } else if (k == "BLOCKDIMS") {
        d_.block_dims = fixed<3>(kw, nums(), last());
    } else if (k == "INIT") {
        const auto v = nums();
        if (v.size() != 3 && v.size() != 4)
            fail(last(), "INIT needs p sw sg [pb]");
        d_.init = {v[0], v[1], v[2]};
        if (v.size() == 4)
            d_.init_pb = v[3];
    } else if (k == "TSTEP") {
        const auto v = nums();
        if (v.empty())
            fail(kw, "TSTEP needs at least one step");
        for (double t : v) {
            if (!(t > 0.0))
                fail(last(), "TSTEP values must be positive");
            d_.tsteps.push_back(t);
            sched_time_ += t;
        }
    } else if (k == "ENDTIME") {
        d_.end_time = fixed<1>(kw, nums(), last())[0];
        if (!(*d_.end_time > 0.0))
            fail(last(), "ENDTIME must be positive");
    } else if (k == "VTKSTEPS") {
        const auto r = read_record(kw);
        if (r.size() != 1 || !r[0].tok)
            fail(kw, "VTKSTEPS takes one integer");
        d_.vtk_every = to_int(*r[0].tok);
        if (d_.vtk_every < 0)
            fail(*r[0].tok, "VTKSTEPS must be non-negative");
    } else if (k == "WORKERS") {
        const auto r = read_record(kw);
        if (r.size() != 1 || !r[0].tok)
            fail(kw, "WORKERS takes one integer");
        d_.solver.workers = to_int(*r[0].tok);
        if (d_.solver.workers < 1)
            fail(*r[0].tok, "WORKERS must be >= 1");
    } else if (k == "NEWTON") {
        const auto r = read_record(kw);
        if (r.size() > 4)
            fail(kw, "NEWTON takes tol maxit forcing theta");
        if (r.size() > 0 && r[0].tok)
            d_.solver.newton_tol = to_double(*r[0].tok);
        if (r.size() > 1 && r[1].tok)
            d_.solver.newton_max_iterations = to_int(*r[1].tok);
        if (r.size() > 2 && r[2].tok) {
            try {
                d_.solver.forcing = parse_forcing_mode(r[2].tok->text);
            } catch (const ConfigError& e) {
                fail(*r[2].tok, e.what());
            }
        }
        if (r.size() > 3 && r[3].tok)
            d_.solver.theta = to_double(*r[3].tok);
    } else if (k == "LINSOLVE") {
        const auto r = read_record(kw);
        if (r.size() > 5)
            fail(kw, "LINSOLVE takes method precond restart tol maxit");
        try {
            if (r.size() > 0 && r[0].tok)
                d_.solver.method = parse_krylov_method(r[0].tok->text);
            if (r.size() > 1 && r[1].tok)
                d_.solver.precond = parse_precond_kind(r[1].tok->text);
        } catch (const std::exception& e) {
            fail(kw, e.what());
        }
        if (r.size() > 2 && r[2].tok)
            d_.solver.restart = to_int(*r[2].tok);
        if (r.size() > 3 && r[3].tok)
            d_.solver.linear_tol = to_double(*r[3].tok);
        if (r.size() > 4 && r[4].tok)
            d_.solver.linear_max_iterations = to_int(*r[4].tok);
    } else if (k == "TIMESTEP") {
        const auto r = read_record(kw);
        if (r.size() > 3)
            fail(kw, "TIMESTEP takes dt_init dt_max dt_min");
        double* f[3] = {&d_.solver.dt_init, &d_.solver.dt_max, &d_.solver.dt_min};
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i].tok)
                *f[i] = to_double(*r[i].tok);
    } else if (k == "WELSPECS") {
        for (const auto& r : read_records(kw)) {
            if (r.size() < 4 || r.size() > 6)
                fail(r.front().where, "WELSPECS record: name type i j [refdepth] [phase]");
            for (std::size_t i = 0; i < 4; ++i)
                if (!r[i].tok)
                    fail(r[i].where, "WELSPECS: name, type, i and j are required");
            DeckWell w;
            w.name = r[0].tok->text;
            const std::string type = upper(r[1].tok->text);
            if (type == "PROD")
                w.type = WellType::Producer;
            else if (type == "INJ")
                w.type = WellType::Injector;
            else
                fail(*r[1].tok, "well type must be PROD or INJ");
            w.i = to_int(*r[2].tok);
            w.j = to_int(*r[3].tok);
            if (w.i < 1 || w.i > d_.dims[0] || w.j < 1 || w.j > d_.dims[1])
                fail(*r[2].tok, "well head outside the grid");
            if (r.size() > 4 && r[4].tok)
                w.ref_depth = to_double(*r[4].tok);
            if (r.size() > 5 && r[5].tok)
                w.injected = parse_phase(r[5]);
            for (const auto& o : d_.wells)
                if (o.name == w.name)
                    fail(*r[0].tok, "duplicate well '" + w.name + "'");
            d_.wells.push_back(w);
        }
    } else if (k == "COMPDAT") {
        for (const auto& r : read_records(kw)) {
            if (r.size() < 5 || r.size() > 8)
                fail(r.front().where, "COMPDAT record: name i j k1 k2 [rw] [skin] [wi]");
            for (std::size_t i = 0; i < 5; ++i)
                if (!r[i].tok)
                    fail(r[i].where, "COMPDAT: name, i, j, k1 and k2 are required");
            DeckCompletion c;
            c.well = r[0].tok->text;
            if (std::none_of(d_.wells.begin(), d_.wells.end(), [&](const DeckWell& w) { return w.name == c.well; }))
                fail(*r[0].tok, "COMPDAT for undeclared well '" + c.well + "'");
            c.i = to_int(*r[1].tok);
            c.j = to_int(*r[2].tok);
            c.k1 = to_int(*r[3].tok);
            c.k2 = to_int(*r[4].tok);
            if (c.i < 1 || c.i > d_.dims[0] || c.j < 1 || c.j > d_.dims[1] || c.k1 < 1 || c.k2 < c.k1 ||
                c.k2 > d_.dims[2])
                fail(*r[1].tok, "completion cells outside the grid");
            if (r.size() > 5 && r[5].tok)
                c.rw = to_double(*r[5].tok);
            if (r.size() > 6 && r[6].tok)
                c.skin = to_double(*r[6].tok);
            if (r.size() > 7 && r[7].tok)
                c.wi = to_double(*r[7].tok);
            d_.completions.push_back(c);
        }
    } else if (k == "WCONPROD" || k == "WCONINJE") {
        const bool inj = k == "WCONINJE";
        for (const auto& r : read_records(kw)) {
            const std::size_t need = inj ? 4 : 3;
            if (r.size() < need || r.size() > need + 1)
                fail(r.front().where, inj ? "WCONINJE record: name phase mode target [bhp limit]"
                                          : "WCONPROD record: name mode target [limit]");
            for (std::size_t i = 0; i < need; ++i)
                if (!r[i].tok)
                    fail(r[i].where, k + ": only the limit may be defaulted");
            DeckControl c;
            c.time = sched_time_;
            c.well = r[0].tok->text;
            const auto w = std::find_if(d_.wells.begin(), d_.wells.end(),
                                        [&](const DeckWell& x) { return x.name == c.well; });
            if (w == d_.wells.end())
                fail(*r[0].tok, k + " for undeclared well '" + c.well + "'");
            if ((w->type == WellType::Injector) != inj)
                fail(*r[0].tok, "well '" + c.well + "' is not " + (inj ? "an injector" : "a producer"));
            std::size_t at = 1;
            if (inj) {
                c.phase = parse_phase(r[1]);
                if (*c.phase != w->injected)
                    fail(*r[1].tok, "injected phase differs from WELSPECS");
                at = 2;
            }
            const std::string mode = upper(r[at].tok->text);
            if (mode == "BHP")
                c.kind = ConstraintKind::Bhp;
            else if (inj && mode == "RATE" && *c.phase == Phase::Water)
                c.kind = ConstraintKind::WaterRate;
            else if (inj && mode == "RATE")
                fail(*r[at].tok, "gas injectors support BHP control only");
            else if (!inj && mode == "ORAT")
                c.kind = ConstraintKind::OilRate;
            else if (!inj && mode == "WRAT")
                c.kind = ConstraintKind::WaterRate;
            else if (!inj && mode == "LRAT")
                c.kind = ConstraintKind::LiquidRate;
            else
                fail(*r[at].tok, "unknown control mode '" + r[at].tok->text + "'");
            c.target = to_double(*r[at + 1].tok);
            if (!(c.target > 0.0) && c.kind == ConstraintKind::Bhp)
                fail(*r[at + 1].tok, "BHP target must be positive");
            if (c.target < 0.0)
                fail(*r[at + 1].tok, "rate targets are positive magnitudes");
            if (r.size() > at + 2 && r[at + 2].tok)
                c.limit = to_double(*r[at + 2].tok);
            if (inj && *c.phase == Phase::Gas && c.limit)
                fail(*r[at + 2].tok, "gas injectors take no rate limit");
            d_.controls.push_back(c);
        }
    } else {
        fail(kw, "unknown keyword '" + kw.text + "'");
    }
}

SimDeck Parser::run()
{
    while (!at_end() && !done_) {
        const Token kw = toks_[pos_++];
        if (kw.quoted || kw.text == "/")
            fail(kw, "expected a keyword, got '" + kw.text + "'");
        Token k = kw;
        k.text = upper(kw.text);
        if (!is_keyword(k.text))
            fail(kw, "unknown keyword '" + kw.text + "'");
        if (k.text != "TSTEP" && k.text != "INCLUDE" && !record_keywords.count(k.text) && seen_.count(k.text))
            fail(kw, "keyword " + k.text + " given twice");
        seen_.emplace(k.text, k);
        keyword(k);
    }

    // Whole-deck checks, reported at the last line read.
    const Token end = toks_.empty() ? Token{"", std::make_shared<const std::string>(file_), 1, 1} : last();
    auto require = [&](const char* k) {
        if (!seen_.count(k))
            fail(end, std::string("missing required keyword ") + k);
    };
    if (!two_phase_ && !d_.black_oil)
        fail(end, "missing model flag TWOPHASE or BLACKOIL");
    for (const char* k : {"DIMENS", "DX", "DY", "DZ", "TOPS", "PORO", "PERMX", "SWOF", "PVTO", "PVTW", "DENSITY", "INIT"})
        require(k);
    if (d_.black_oil) {
        require("SGOF");
        require("PVDG");
    }
    if (d_.dual_porosity) {
        require("FPORO");
        require("FPERMX");
    } else {
        for (const char* k : {"FPORO", "FPERMX", "FPERMY", "FPERMZ", "SIGMA", "BLOCKDIMS", "DUALPERM"})
            if (seen_.count(k))
                fail(seen_.at(k), std::string(k) + " requires DUALPORO");
    }
    if (d_.tsteps.empty() && !d_.end_time)
        fail(end, "missing time section: TSTEP or ENDTIME");
    if (!d_.tsteps.empty() && d_.end_time)
        fail(seen_.at("ENDTIME"), "TSTEP and ENDTIME are exclusive");
    if (d_.init_pb && !d_.black_oil)
        fail(seen_.at("INIT"), "bubble point in INIT needs BLACKOIL");
    for (const auto& w : d_.wells) {
        if (std::none_of(d_.completions.begin(), d_.completions.end(),
                         [&](const DeckCompletion& c) { return c.well == w.name; }))
            fail(seen_.at("WELSPECS"), "well '" + w.name + "' has no COMPDAT");
        const auto first = std::find_if(d_.controls.begin(), d_.controls.end(),
                                        [&](const DeckControl& c) { return c.well == w.name; });
        if (first == d_.controls.end() || first->time != 0.0)
            fail(seen_.at("WELSPECS"), "well '" + w.name + "' has no control before the first TSTEP");
    }
    return d_;
}

// ---------------------------------------------------------------------------
// Writer

std::string num(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_values(std::ostream& o, const std::vector<double>& v, std::size_t per_line = 8)
{
    // Runs of equal values collapse to N*value.
    std::size_t col = 0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i + 1;
        while (j < v.size() && v[j] == v[i])
            ++j;
        o << (col ? " " : "") << (j - i > 1 ? std::to_string(j - i) + "*" : "") << num(v[i]);
        if (++col == per_line) {
            o << '\n';
            col = 0;
        }
        i = j;
    }
    if (col)
        o << '\n';
}

template <std::size_t W>
void write_table(std::ostream& o, const char* kw, const std::vector<std::array<double, W>>& rows)
{
    if (rows.empty())
        return;
    o << kw << '\n';
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < W; ++c)
            o << (c ? " " : "") << num(r[c]);
        o << '\n';
    }
    o << "/\n\n";
}

void write_array(std::ostream& o, const char* kw, const std::vector<double>& v)
{
    if (v.empty())
        return;
    o << kw << '\n';
    write_values(o, v);
    o << "/\n\n";
}

std::string opt(const std::optional<double>& v)
{
    return v ? num(*v) : "1*";
}

std::string quote(const std::string& s)
{
    return "'" + s + "'";
}

std::string mode_name(const DeckControl& c)
{
    switch (c.kind) {
    case ConstraintKind::Bhp: return "BHP";
    case ConstraintKind::OilRate: return "ORAT";
    case ConstraintKind::WaterRate: return c.phase ? "RATE" : "WRAT";
    case ConstraintKind::LiquidRate: return "LRAT";
    }
    return "BHP";
}

} // namespace

std::vector<double> SimDeck::report_times() const
{
    if (tsteps.empty())
        return end_time ? std::vector<double>{*end_time} : std::vector<double>{};
    std::vector<double> t;
    double s = 0.0;
    for (double d : tsteps)
        t.push_back(s += d);
    return t;
}

SimDeck parse_deck(const std::string& text, const std::string& file)
{
    return Parser(tokenize(text, file), file).run();
}

SimDeck parse_deck_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open deck file", path, 0, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_deck(ss.str(), path);
}

std::string write_deck(const SimDeck& d)
{
    std::ostringstream o;
    o << (d.black_oil ? "BLACKOIL" : "TWOPHASE") << "\n";
    if (d.dual_porosity)
        o << "DUALPORO\n";
    if (d.dual_permeability)
        o << "DUALPERM\n";
    o << "\nDIMENS\n" << d.dims[0] << ' ' << d.dims[1] << ' ' << d.dims[2] << " /\n\n";
    write_array(o, "DX", d.dx);
    write_array(o, "DY", d.dy);
    write_array(o, "DZ", d.dz);
    o << "TOPS\n" << num(d.tops) << " /\n\n";
    write_array(o, "PORO", d.poro);
    write_array(o, "PERMX", d.permx);
    write_array(o, "PERMY", d.permy);
    write_array(o, "PERMZ", d.permz);
    o << "ROCKC\n" << num(d.rock_p_ref) << ' ' << num(d.rock_c) << " /\n\n";
    if (d.dual_porosity) {
        write_array(o, "FPORO", d.fporo);
        write_array(o, "FPERMX", d.fpermx);
        write_array(o, "FPERMY", d.fpermy);
        write_array(o, "FPERMZ", d.fpermz);
        if (d.sigma)
            o << "SIGMA\n" << num(*d.sigma) << " /\n\n";
        o << "BLOCKDIMS\n"
          << num(d.block_dims[0]) << ' ' << num(d.block_dims[1]) << ' ' << num(d.block_dims[2]) << " /\n\n";
    }

    write_table(o, "SWOF", d.swof);
    write_table(o, "SGOF", d.sgof);
    write_table(o, "PVTO", d.pvto);
    o << "OILUSAT\n" << num(d.oil_usat[0]) << ' ' << num(d.oil_usat[1]) << " /\n\n";
    o << "PVTW\n";
    for (std::size_t i = 0; i < 4; ++i)
        o << (i ? " " : "") << num(d.pvtw[i]);
    o << " /\n\n";
    write_table(o, "PVDG", d.pvdg);
    o << "DENSITY\n" << num(d.density[0]) << ' ' << num(d.density[1]) << ' ' << num(d.density[2]) << " /\n\n";

    o << "INIT\n" << num(d.init[0]) << ' ' << num(d.init[1]) << ' ' << num(d.init[2]);
    if (d.init_pb)
        o << ' ' << num(*d.init_pb);
    o << " /\n\n";

    const auto& s = d.solver;
    o << "NEWTON\n"
      << num(s.newton_tol) << ' ' << s.newton_max_iterations << ' ' << to_string(s.forcing) << ' ' << num(s.theta)
      << " /\n\n";
    o << "LINSOLVE\n"
      << to_string(s.method) << ' ' << to_string(s.precond) << ' ' << s.restart << ' ' << num(s.linear_tol) << ' '
      << s.linear_max_iterations << " /\n\n";
    o << "TIMESTEP\n" << num(s.dt_init) << ' ' << num(s.dt_max) << ' ' << num(s.dt_min) << " /\n\n";
    o << "WORKERS\n" << s.workers << " /\n\n";
    if (d.vtk_every)
        o << "VTKSTEPS\n" << d.vtk_every << " /\n\n";

    if (!d.wells.empty()) {
        o << "WELSPECS\n";
        for (const auto& w : d.wells) {
            o << quote(w.name) << ' ' << (w.type == WellType::Injector ? "INJ" : "PROD") << ' ' << w.i << ' ' << w.j
              << ' ' << opt(w.ref_depth) << ' ' << (w.injected == Phase::Gas ? "GAS" : "WATER") << " /\n";
        }
        o << "/\n\nCOMPDAT\n";
        for (const auto& c : d.completions)
            o << quote(c.well) << ' ' << c.i << ' ' << c.j << ' ' << c.k1 << ' ' << c.k2 << ' ' << num(c.rw) << ' '
              << num(c.skin) << ' ' << opt(c.wi) << " /\n";
        o << "/\n\n";
    }

    // Controls interleave with TSTEP by schedule time.
    auto emit_controls = [&](double t) {
        std::vector<const DeckControl*> at;
        for (const auto& c : d.controls)
            if (c.time == t)
                at.push_back(&c);
        for (std::size_t i = 0; i < at.size();) {
            const bool inj = at[i]->phase.has_value();
            o << (inj ? "WCONINJE\n" : "WCONPROD\n");
            for (; i < at.size() && at[i]->phase.has_value() == inj; ++i) {
                const DeckControl& c = *at[i];
                o << quote(c.well) << ' ';
                if (inj)
                    o << (*c.phase == Phase::Gas ? "GAS" : "WATER") << ' ';
                o << mode_name(c) << ' ' << num(c.target) << ' ' << opt(c.limit) << " /\n";
            }
            o << "/\n\n";
        }
    };
    emit_controls(0.0);
    double t = 0.0;
    for (double step : d.tsteps) {
        o << "TSTEP\n" << num(step) << " /\n\n";
        t += step;
        emit_controls(t);
    }
    if (d.end_time)
        o << "ENDTIME\n" << num(*d.end_time) << " /\n\n";
    o << "END\n";
    return o.str();
}

// ---------------------------------------------------------------------------
// Conversion to SI

namespace {

std::vector<double> scaled(const std::vector<double>& v, double f)
{
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [f](double x) { return x * f; });
    return out;
}

std::vector<std::array<double, 3>> perm_si(const std::vector<double>& kx, const std::vector<double>& ky,
                                           const std::vector<double>& kz)
{
    std::vector<std::array<double, 3>> k(kx.size());
    for (std::size_t c = 0; c < kx.size(); ++c)
        k[c] = {kx[c] * units::millidarcy, (ky.empty() ? kx : ky)[c] * units::millidarcy,
                (kz.empty() ? kx : kz)[c] * units::millidarcy};
    return k;
}

double rate_si(ConstraintKind kind, Phase phase, double v)
{
    if (kind == ConstraintKind::Bhp)
        return v * units::psi;
    return v * (phase == Phase::Gas ? units::mscf_per_day : units::stb_per_day);
}

} // namespace

SimInput to_sim_input(const SimDeck& d)
{
    SimInput in;
    in.grid = build_grid(d.dims[0], d.dims[1], d.dims[2], scaled(d.dx, units::ft), scaled(d.dy, units::ft),
                         scaled(d.dz, units::ft), d.tops * units::ft);
    const Grid& g = in.grid;

    in.rock.poro = d.poro;
    in.rock.perm = perm_si(d.permx, d.permy, d.permz);
    in.rock.cr = d.rock_c / units::psi;
    in.rock.p_ref = d.rock_p_ref * units::psi;

    in.fluid.black_oil = d.black_oil;
    std::vector<WaterOilRow> wo;
    for (const auto& r : d.swof)
        wo.push_back({r[0], r[1], r[2], r[3] * units::psi});
    std::vector<GasOilRow> go;
    if (d.black_oil)
        for (const auto& r : d.sgof)
            go.push_back({r[0], r[1], r[2], r[3] * units::psi});
    in.fluid.relperm = RelPermTable(wo, go);

    std::vector<OilPvtRow> oil;
    for (const auto& r : d.pvto)
        oil.push_back({r[0] * units::psi, r[2], r[3] * units::centipoise, d.black_oil ? r[1] * units::rs_field : 0.0});
    WaterPvt w;
    w.p_ref = d.pvtw[0] * units::psi;
    w.bw_ref = d.pvtw[1];
    w.cw = d.pvtw[2] / units::psi;
    w.muw = d.pvtw[3] * units::centipoise;
    std::vector<GasPvtRow> gas;
    if (d.black_oil)
        for (const auto& r : d.pvdg)
            gas.push_back({r[0] * units::psi, r[1] * units::bg_field, r[2] * units::centipoise});
    const SurfaceDensities rho{d.density[0] * units::lb_per_ft3, d.density[1] * units::lb_per_ft3,
                               d.density[2] * units::lb_per_ft3};
    in.fluid.pvt = PvtTable(oil, d.oil_usat[0] / units::psi, d.oil_usat[1] * units::centipoise / units::psi, w, gas, rho);

    if (d.dual_porosity) {
        in.dual.enabled = true;
        in.dual.dual_permeability = d.dual_permeability;
        in.dual.poro_f = d.fporo;
        in.dual.perm_f = perm_si(d.fpermx, d.fpermy, d.fpermz);
        in.dual.block = {d.block_dims[0] * units::ft, d.block_dims[1] * units::ft, d.block_dims[2] * units::ft};
        in.dual.sigma = d.sigma ? *d.sigma / units::ft2 : 0.0;
    }

    const auto& perm_w = d.dual_porosity ? in.dual.perm_f : in.rock.perm;
    const double wi_field = units::bbl * units::centipoise / (units::day * units::psi);
    for (const auto& dw : d.wells) {
        Well well;
        well.name = dw.name;
        well.type = dw.type;
        well.injected = dw.injected;
        for (const auto& c : d.completions) {
            if (c.well != dw.name)
                continue;
            for (int k = c.k1; k <= c.k2; ++k) {
                const Index cell = g.index(c.i - 1, c.j - 1, k - 1);
                Perforation p;
                p.cell = cell;
                p.depth = g.cell(cell).depth;
                if (c.wi) {
                    p.wi = *c.wi * wi_field;
                } else {
                    const std::array<double, 3> ext{g.extent(cell, 0), g.extent(cell, 1), g.extent(cell, 2)};
                    p.wi = peaceman_index(ext, perm_w[static_cast<std::size_t>(cell)], c.rw * units::ft, c.skin);
                }
                well.perforations.push_back(p);
            }
        }
        well.ref_depth = dw.ref_depth ? *dw.ref_depth * units::ft : well.perforations.front().depth;

        const Phase rate_phase = dw.type == WellType::Injector ? dw.injected : Phase::Oil;
        for (const auto& c : d.controls) {
            if (c.well != dw.name)
                continue;
            Constraint k;
            k.kind = c.kind;
            k.target = rate_si(c.kind, rate_phase, c.target);
            if (c.kind == ConstraintKind::Bhp) {
                k.limit_kind = dw.type == WellType::Injector ? ConstraintKind::WaterRate : ConstraintKind::LiquidRate;
                if (c.limit)
                    k.rate_limit = rate_si(k.limit_kind, rate_phase, *c.limit);
            } else if (c.limit) {
                k.bhp_limit = *c.limit * units::psi;
            }
            const double start = c.time * units::day;
            if (!well.schedule.empty() && well.schedule.back().start == start)
                well.schedule.back().constraint = k;
            else
                well.schedule.push_back({start, k});
        }
        well.validate();
        in.wells.push_back(std::move(well));
    }

    const auto& s = d.solver;
    in.newton.tol = s.newton_tol;
    in.newton.max_iterations = s.newton_max_iterations;
    in.newton.forcing = s.forcing;
    in.newton.theta = s.theta;
    in.newton.linear.method = s.method;
    in.newton.linear.restart = s.restart;
    in.newton.linear.tol = s.linear_tol;
    in.newton.linear.max_iterations = s.linear_max_iterations;
    in.newton.precond = s.precond;
    in.newton.validate();
    in.steps.dt_init = s.dt_init * units::day;
    in.steps.dt_max = s.dt_max * units::day;
    in.steps.dt_min = s.dt_min * units::day;
    in.steps.validate();
    in.workers = s.workers;

    in.p_init = d.init[0] * units::psi;
    in.sw_init = d.init[1];
    in.sg_init = d.init[2];
    if (d.init_pb)
        in.pb_init = *d.init_pb * units::psi;
    for (double t : d.report_times())
        in.report_times.push_back(t * units::day);
    return in;
}

ReservoirState SimInput::initial_state(const Model& model) const
{
    ReservoirState s = model.uniform_state(p_init, sw_init, sg_init);
    if (pb_init && model.black_oil()) {
        if (sg_init != 0.0 || *pb_init > p_init)
            throw ConfigError("undersaturated start needs sg = 0 and pb <= p");
        std::fill(s.saturated.begin(), s.saturated.end(), 0);
        std::fill(s.x.begin(), s.x.end(), *pb_init);
    }
    return s;
}

} // namespace bosim
