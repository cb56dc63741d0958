#include "bosim/linalg/matrix_market.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace bosim {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Header {
    std::string format;   // coordinate | array
    std::string symmetry; // general | symmetric
};

Header read_header(std::istream& in, const std::string& name, int& lineno)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty Matrix Market file", name, 1, 1);
    lineno = 1;
    std::istringstream ss(line);
    std::string banner, object, format, field, symmetry;
    ss >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        throw ParseError("missing %%MatrixMarket matrix banner", name, 1, 1);
    field = lower(field);
    if (field != "real" && field != "integer" && field != "double")
        throw ParseError("only real matrices are supported", name, 1, 1);
    Header h{lower(format), lower(symmetry)};
    if (h.format != "coordinate" && h.format != "array")
        throw ParseError("unsupported format '" + format + "'", name, 1, 1);
    if (h.symmetry != "general" && h.symmetry != "symmetric")
        throw ParseError("unsupported symmetry '" + symmetry + "'", name, 1, 1);
    return h;
}

// Next non-comment, non-blank line.
bool data_line(std::istream& in, std::string& line, int& lineno)
{
    while (std::getline(in, line)) {
        ++lineno;
        const auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '%')
            continue;
        return true;
    }
    return false;
}

} // namespace

SparseMatrix read_matrix_market(std::istream& in, const std::string& name)
{
    int lineno = 0;
    const Header h = read_header(in, name, lineno);
    if (h.format != "coordinate")
        throw ParseError("expected a coordinate matrix", name, 1, 1);
    std::string line;
    if (!data_line(in, line, lineno))
        throw ParseError("missing size line", name, lineno + 1, 1);
    Index rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
            throw ParseError("malformed size line", name, lineno, 1);
    }
    std::vector<SparseMatrix::Triplet> t;
    t.reserve(static_cast<std::size_t>(h.symmetry == "symmetric" ? 2 * nnz : nnz));
    for (Index k = 0; k < nnz; ++k) {
        if (!data_line(in, line, lineno))
            throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k), name,
                             lineno + 1, 1);
        std::istringstream ss(line);
        Index i = 0, j = 0;
        double v = 0.0;
        if (!(ss >> i >> j >> v))
            throw ParseError("malformed entry", name, lineno, 1);
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError("entry index out of range", name, lineno, 1);
        t.emplace_back(i - 1, j - 1, v);
        if (h.symmetry == "symmetric" && i != j)
            t.emplace_back(j - 1, i - 1, v);
    }
    return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

SparseMatrix read_matrix_market_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open '" + path + "'");
    return read_matrix_market(in, path);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a)
{
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows << ' ' << a.cols << ' ' << a.nnz() << '\n';
    out << std::setprecision(17);
    for (Index i = 0; i < a.rows; ++i)
        for (Index k = a.row_ptr[static_cast<std::size_t>(i)]; k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            out << i + 1 << ' ' << a.col[static_cast<std::size_t>(k)] + 1 << ' ' << a.val[static_cast<std::size_t>(k)]
                << '\n';
}

void write_matrix_market_file(const std::string& path, const SparseMatrix& a)
{
    std::ofstream out(path);
    if (!out)
        throw InvalidInput("cannot write '" + path + "'");
    write_matrix_market(out, a);
}

std::vector<double> read_mm_vector(std::istream& in, const std::string& name)
{
    int lineno = 0;
    const Header h = read_header(in, name, lineno);
    if (h.format != "array")
        throw ParseError("expected an array-format vector", name, 1, 1);
    std::string line;
    if (!data_line(in, line, lineno))
        throw ParseError("missing size line", name, lineno + 1, 1);
    Index rows = 0, cols = 0;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols) || cols != 1 || rows < 0)
        throw ParseError("vector must have one column", name, lineno, 1);
    std::vector<double> v(static_cast<std::size_t>(rows));
    for (auto& x : v) {
        if (!data_line(in, line, lineno))
            throw ParseError("vector ends early", name, lineno + 1, 1);
        std::istringstream es(line);
        if (!(es >> x))
            throw ParseError("malformed value", name, lineno, 1);
    }
    return v;
}

void write_mm_vector(std::ostream& out, const std::vector<double>& v)
{
    out << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n" << std::setprecision(17);
    for (double x : v)
        out << x << '\n';
}

} // namespace bosim
