#include "deflab/io.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace deflab {

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

namespace {

nlohmann::json header(const SymSector& sector)
{
    return {{"d", sector.modes()}, {"N", sector.particles()}, {"basis_order", "lex-desc"}};
}

void check_header(const nlohmann::json& j)
{
    if (!j.contains("basis_order") || j.at("basis_order") != "lex-desc") {
        throw DomainError("JSON payload: basis_order must be \"lex-desc\"");
    }
}

} // namespace

SymSector sector_from_json(const nlohmann::json& j)
{
    check_header(j);
    return SymSector(j.at("d").get<int>(), j.at("N").get<int>());
}

nlohmann::json to_json(const Ket& ket)
{
    auto j = header(ket.sector);
    std::vector<double> re, im;
    for (Eigen::Index i = 0; i < ket.amplitudes.size(); ++i) {
        re.push_back(ket.amplitudes(i).real());
        im.push_back(ket.amplitudes(i).imag());
    }
    j["re"] = re;
    j["im"] = im;
    return j;
}

Ket ket_from_json(const nlohmann::json& j)
{
    SymSector sector = sector_from_json(j);
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != sector.dim() || im.size() != sector.dim()) {
        throw DomainError("ket JSON: amplitude count does not match the sector dimension");
    }
    Vector amp(sector.dim());
    for (std::size_t i = 0; i < re.size(); ++i) {
        amp(i) = Complex(re[i], im[i]);
    }
    return Ket{sector, amp};
}

nlohmann::json operator_to_json(const SymSector& sector, const Matrix& op)
{
    auto j = header(sector);
    std::vector<double> re, im;
    re.reserve(op.size());
    im.reserve(op.size());
    for (Eigen::Index r = 0; r < op.rows(); ++r) {
        for (Eigen::Index c = 0; c < op.cols(); ++c) {
            re.push_back(op(r, c).real());
            im.push_back(op(r, c).imag());
        }
    }
    j["re"] = re;
    j["im"] = im;
    return j;
}

Matrix operator_from_json(const nlohmann::json& j, const SymSector& expected)
{
    SymSector sector = sector_from_json(j);
    if (sector != expected) {
        throw DomainError("operator JSON: sector does not match the expected one");
    }
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    const std::size_t dim = sector.dim();
    if (re.size() != dim * dim || im.size() != dim * dim) {
        throw DomainError("operator JSON: entry count does not match dim^2");
    }
    Matrix op(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            op(r, c) = Complex(re[r * dim + c], im[r * dim + c]);
        }
    }
    return op;
}

nlohmann::json to_json(const DensityOp& rho)
{
    auto j = operator_to_json(rho.sector(), rho.matrix());
    j["trace_tol"] = tolerances().trace;
    return j;
}

DensityOp density_from_json(const nlohmann::json& j)
{
    SymSector sector = sector_from_json(j);
    return DensityOp(sector, operator_from_json(j, sector));
}

nlohmann::json matrix_to_json(const Matrix& m)
{
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> rr, ii;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(r, c).real());
            ii.push_back(m(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return {{"re", re}, {"im", im}};
}

Matrix matrix_from_json(const nlohmann::json& j)
{
    const auto re = j.at("re").get<std::vector<std::vector<double>>>();
    std::vector<std::vector<double>> im;
    if (j.contains("im")) {
        im = j.at("im").get<std::vector<std::vector<double>>>();
    }
    const std::size_t rows = re.size();
    const std::size_t cols = rows == 0 ? 0 : re[0].size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (re[r].size() != cols || (!im.empty() && (im.size() != rows || im[r].size() != cols))) {
            throw DomainError("matrix JSON: ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = Complex(re[r][c], im.empty() ? 0.0 : im[r][c]);
        }
    }
    return m;
}

} // namespace deflab
