/**
 * @file
 * JSON problem manifests and propagator output.
 *
 * Manifest schema:
 *
 *     {
 *       "dim": 2,
 *       "precision": "fp64",                // optional
 *       "dt": 0.1,
 *       "drift": [[[re, im], [re, im]], [[re, im], [re, im]]],
 *       "controls": [ <matrix>, ... ],      // optional
 *       "amplitudes": { "pts": 10, "data": [[c_1, .., c_N], ...] }
 *                  or { "pts": 10, "csv": "amps.csv" }
 *     }
 *
 * Matrices are row-major nested arrays of [re, im] pairs (a bare number is
 * read as a real entry). A CSV sidecar holds one row per time sample and one
 * column per control, with an optional header row; relative paths resolve
 * against the manifest's directory. Drift-only problems may omit the data.
 */

#pragma once

#include <chebprop/propagator.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace chebprop {

struct Problem {
    ControlSystem system;
    ControlAmplitudes amplitudes;
    std::optional<Precision> precision;
};

/// Throws ErrorCode::schema for malformed content, ErrorCode::io for unreadable files.
Problem parse_problem(std::string_view json_text, const std::filesystem::path &base_dir = {});
Problem load_problem(const std::filesystem::path &manifest);

/// Writes a problem back out with inline amplitude data.
std::string problem_to_json(const Problem &problem);

std::vector<double> read_amplitude_csv(const std::filesystem::path &csv, std::size_t pts, std::size_t controls);

/// {"U": <matrix>, "slice_count", "m_max", "beta", "predicted_error", "precision"[, "cumulative": [...]]}
std::string propagator_to_json(const PropagatorResult &result,
                               const std::vector<Matrix<double>> *cumulative = nullptr);

/// Parses the "U" entry written by propagator_to_json.
Matrix<double> propagator_from_json(std::string_view json_text);

void write_text_file(const std::filesystem::path &path, std::string_view content);
std::string read_text_file(const std::filesystem::path &path);

} // namespace chebprop
