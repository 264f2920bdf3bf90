#pragma once

#include <string>
#include <vector>

#include "qreset/effective.hpp"
#include "qreset/readout.hpp"

namespace qreset {

/// Fixed 12-significant-digit formatting so identical runs produce identical
/// bytes regardless of locale or stream state.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> comments;  // written as leading '# ' lines
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // column-major
};

void write_csv(const CsvTable& table, const std::string& path);
std::string csv_to_string(const CsvTable& table);

CsvTable trajectory_table(const PopulationTrajectory& traj);
std::string trajectory_to_json(const PopulationTrajectory& traj);

CsvTable landscape_table(const ResetRateLandscape& ls);
CsvTable ridge_table(const ResetRateLandscape& ls);
std::string landscape_to_json(const ResetRateLandscape& ls);

CsvTable shots_table(const ShotSet& set, const std::vector<double>& herald = {});

std::string gmm_to_json(const GmmModel& m);
std::string assignment_to_json(const Eigen::Matrix3d& r, double condition_number);

}  // namespace qreset
