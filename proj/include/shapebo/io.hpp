#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "shapebo/bench.hpp"

namespace shapebo::io {

/// Native database file: a `key value` header block terminated by `rows`,
/// then one `design... phi...` numeric row per record.
void save_database(const ShapeDatabase& db, const std::filesystem::path& path);
ShapeDatabase load_database(const std::filesystem::path& path);

/// CSV variant with the fixed column order design_0..design_{d-1},
/// phi_0..phi_{D-1}.
void save_database_csv(const ShapeDatabase& db, const std::filesystem::path& path);

/// Basis file: header (D, d', mapping spec) + mean + eigenvalues +
/// column-major eigenvectors.
void save_basis(const EigenBasis& basis, const MappingSpec& mapping,
                const std::filesystem::path& path);

/// Spectrum CSV with the table layout `j, eigenvalue, cumulative_pct`.
void save_spectrum_csv(const EigenBasis& basis, const std::filesystem::path& path,
                       int max_rows = 0);

/// Human-readable model files.
void save_gp_model(const GpModel& model, const std::filesystem::path& path);
void save_additive_model(const AdditiveGpModel& model, const std::filesystem::path& path);

/// Selection report CSV `j, theta_j, range_j, normalized_theta_j, active`.
void save_selection_csv(const ActiveSet& set, const std::filesystem::path& path);

/// Run log CSV: iter, eval_index, x..., alpha..., y, f_min, replicated,
/// strategy, active_set, ei_value, wall_ms.
void save_run_log(const std::vector<EvalRecord>& log, const std::filesystem::path& path);

void save_r2_report(const std::vector<R2Row>& rows, const std::filesystem::path& path);
void save_opt_report(const std::vector<OptRow>& rows, const std::filesystem::path& path);

/// JSON config files; every field optional except `seed`, which must come
/// either from the file or from the --seed flag (the flag wins). Unknown
/// keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path, ProblemId fallback_problem,
                          std::optional<std::uint64_t> seed_flag = {});
R2BenchConfig load_r2_config(const std::filesystem::path& path, ProblemId fallback_problem,
                             std::optional<std::uint64_t> seed_flag = {});
OptBenchConfig load_opt_config(const std::filesystem::path& path, ProblemId fallback_problem,
                               std::optional<std::uint64_t> seed_flag = {});

} // namespace shapebo::io
