#include <chebprop/problem_file.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace chebprop {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string &what) {
    throw Error(ErrorCode::schema, what);
}

double number_at(const json &j, const std::string &where) {
    if (!j.is_number())
        schema_error(where + " must be a number");
    return j.get<double>();
}

Matrix<double> matrix_from_json(const json &j, std::size_t dim, const std::string &name) {
    if (!j.is_array() || j.size() != dim)
        schema_error(name + " must be an array of " + std::to_string(dim) + " rows");
    Matrix<double> m(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const json &row = j[r];
        if (!row.is_array() || row.size() != dim)
            schema_error(name + " row " + std::to_string(r) + " must hold " + std::to_string(dim) + " entries");
        for (std::size_t c = 0; c < dim; ++c) {
            const json &e     = row[c];
            const std::string at = name + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
            if (e.is_number())
                m(r, c) = e.get<double>();
            else if (e.is_array() && e.size() == 2)
                m(r, c) = {number_at(e[0], at + ".re"), number_at(e[1], at + ".im")};
            else
                schema_error(at + " must be [re, im] or a number");
        }
    }
    return m;
}

json matrix_to_json(const Matrix<double> &m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.dim(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.dim(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t count_at(const json &obj, const char *key, const std::string &where) {
    if (!obj.contains(key) || !obj[key].is_number_integer() || obj[key].get<long long>() < 0)
        schema_error(where + "." + key + " must be a non-negative integer");
    return obj[key].get<std::size_t>();
}

bool parse_double(std::string_view token, double &out) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
        token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
        token.remove_suffix(1);
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    return res.ec == std::errc{} && res.ptr == token.data() + token.size() && !token.empty();
}

} // namespace

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path &path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    out << content;
    if (!out)
        throw Error(ErrorCode::io, "write to '" + path.string() + "' failed");
}

std::vector<double> read_amplitude_csv(const std::filesystem::path &csv, std::size_t pts, std::size_t controls) {
    std::istringstream in(read_text_file(csv));
    std::vector<double> values;
    values.reserve(pts * controls);
    std::string line;
    std::size_t row = 0, line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::vector<double> cells;
        bool numeric = true;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            double v         = 0;
            if (!parse_double(rest.substr(0, comma), v)) {
                numeric = false;
                break;
            }
            cells.push_back(v);
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (!numeric) {
            if (row == 0 && values.empty())
                continue; // header
            schema_error(csv.string() + ":" + std::to_string(line_no) + ": non-numeric amplitude");
        }
        if (cells.size() != controls)
            schema_error(csv.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(controls) +
                         " columns, found " + std::to_string(cells.size()));
        values.insert(values.end(), cells.begin(), cells.end());
        ++row;
    }
    if (row != pts)
        schema_error(csv.string() + ": expected " + std::to_string(pts) + " rows, found " + std::to_string(row));
    return values;
}

Problem parse_problem(std::string_view json_text, const std::filesystem::path &base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error &e) {
        schema_error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        schema_error("manifest must be a JSON object");

    const std::size_t dim = count_at(j, "dim", "manifest");
    if (dim == 0)
        schema_error("manifest.dim must be >= 1");
    if (!j.contains("dt"))
        schema_error("manifest.dt is required");
    const double dt = number_at(j["dt"], "manifest.dt");
    if (!j.contains("drift"))
        schema_error("manifest.drift is required");
    Matrix<double> drift = matrix_from_json(j["drift"], dim, "drift");

    std::vector<Matrix<double>> controls;
    if (j.contains("controls")) {
        if (!j["controls"].is_array())
            schema_error("manifest.controls must be an array");
        for (std::size_t i = 0; i < j["controls"].size(); ++i)
            controls.push_back(matrix_from_json(j["controls"][i], dim, "controls[" + std::to_string(i) + "]"));
    }
    const std::size_t n = controls.size();

    std::optional<Precision> precision;
    if (j.contains("precision")) {
        if (!j["precision"].is_string())
            schema_error("manifest.precision must be a string");
        precision = parse_precision(j["precision"].get<std::string>());
    }

    if (!j.contains("amplitudes") || !j["amplitudes"].is_object())
        schema_error("manifest.amplitudes must be an object");
    const json &amps      = j["amplitudes"];
    const std::size_t pts = count_at(amps, "pts", "amplitudes");
    std::vector<double> values;
    if (amps.contains("csv")) {
        if (!amps["csv"].is_string())
            schema_error("amplitudes.csv must be a path string");
        std::filesystem::path csv = amps["csv"].get<std::string>();
        if (csv.is_relative())
            csv = base_dir / csv;
        values = read_amplitude_csv(csv, pts, n);
    } else if (amps.contains("data")) {
        const json &data = amps["data"];
        if (!data.is_array() || data.size() != pts)
            schema_error("amplitudes.data must hold pts = " + std::to_string(pts) + " rows");
        values.reserve(pts * n);
        for (std::size_t k = 0; k < pts; ++k) {
            if (!data[k].is_array() || data[k].size() != n)
                schema_error("amplitudes.data[" + std::to_string(k) + "] must hold " + std::to_string(n) + " values");
            for (std::size_t i = 0; i < n; ++i)
                values.push_back(number_at(data[k][i], "amplitudes.data[" + std::to_string(k) + "]"));
        }
    } else if (n > 0 && pts > 0) {
        schema_error("amplitudes needs either 'data' or 'csv'");
    }

    try {
        return Problem{ControlSystem(std::move(drift), std::move(controls)), ControlAmplitudes(pts, n, dt, std::move(values)),
                       precision};
    } catch (const Error &e) {
        if (e.code() == ErrorCode::config || e.code() == ErrorCode::shape)
            schema_error(e.what());
        throw;
    }
}

Problem load_problem(const std::filesystem::path &manifest) {
    return parse_problem(read_text_file(manifest), manifest.parent_path());
}

std::string problem_to_json(const Problem &problem) {
    const auto &sys  = problem.system;
    const auto &amps = problem.amplitudes;
    json j;
    j["dim"] = sys.dim();
    if (problem.precision)
        j["precision"] = std::string(to_string(*problem.precision));
    j["dt"]       = amps.dt();
    j["drift"]    = matrix_to_json(sys.drift());
    j["controls"] = json::array();
    for (const auto &c : sys.controls())
        j["controls"].push_back(matrix_to_json(c));
    json data = json::array();
    for (std::size_t k = 0; k < amps.pts(); ++k) {
        json row = json::array();
        for (std::size_t i = 0; i < amps.controls(); ++i)
            row.push_back(amps(k, i));
        data.push_back(std::move(row));
    }
    j["amplitudes"] = {{"pts", amps.pts()}, {"data", std::move(data)}};
    return j.dump(2);
}

std::string propagator_to_json(const PropagatorResult &result, const std::vector<Matrix<double>> *cumulative) {
    json j;
    j["U"]               = matrix_to_json(result.U);
    j["slice_count"]     = result.slice_count;
    j["m_max"]           = result.plan.m_max;
    j["beta"]            = result.plan.beta;
    j["predicted_error"] = result.plan.predicted_error;
    j["precision"]       = std::string(to_string(result.precision));
    if (cumulative) {
        json all = json::array();
        for (const auto &m : *cumulative)
            all.push_back(matrix_to_json(m));
        j["cumulative"] = std::move(all);
    }
    // max_digits10 round-trips doubles exactly.
    return j.dump(2);
}

Matrix<double> propagator_from_json(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error &e) {
        schema_error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("U") || !j["U"].is_array())
        schema_error("propagator JSON needs a 'U' matrix");
    return matrix_from_json(j["U"], j["U"].size(), "U");
}

} // namespace chebprop
