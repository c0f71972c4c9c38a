#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>

#include <Eigen/Core>

#include "ncrs/feature.hpp"
#include "ncrs/genome.hpp"

namespace ncrs {

struct Elite {
    Eigen::VectorXd genome;
    double fitness = 0.0;
    CellKey key{};
    int generation = 0;
};

enum class InsertStatus { NewCell, Improved, Rejected };

struct InsertOutcome {
    InsertStatus status = InsertStatus::Rejected;
    double improvement = 0.0;  // fitness gain for Improved, the fitness itself for NewCell
};

/// Number of feature triples (s, a, b) with 1 <= b <= area, s, a >= 0, s + a <= b.
/// Closed form: sum over b of (b+1)(b+2)/2; 3275 for a 5x5 grid.
long long feature_configurations(int grid_area);

/// MAP-Elites store: one elite per feature cell.
struct Archive {
    std::map<CellKey, Elite> elites;
    long long total_configurations = 3275;

    std::size_t size() const { return elites.size(); }
    bool empty() const { return elites.empty(); }
    const Elite* best() const;
};

/// Places the candidate if its cell is empty or it strictly beats the incumbent.
InsertOutcome archive_insert(Archive& archive, const Eigen::VectorXd& genome, double fitness, const CellKey& key,
                             int generation = 0);

struct QdMetrics {
    double cells_filled_pct = 0.0;
    double qd_score = 0.0;
};

QdMetrics qd_metrics(const Archive& archive);

void save_archive(std::ostream& os, const Archive& archive);
Archive load_archive(std::istream& is);

/// Directory form: index.csv (sensors, actuators, body_parts, fitness, generation,
/// genome_file) plus one genome file per elite.
void write_archive_dir(const std::filesystem::path& dir, const Archive& archive, const GenomeHeader& header);

struct ArchiveDir {
    Archive archive;
    std::optional<GenomeHeader> header;  // from the first genome file, if any
};
ArchiveDir read_archive_dir(const std::filesystem::path& dir);

} // namespace ncrs
