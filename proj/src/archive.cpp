#include "ncrs/archive.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ncrs/binary_io.hpp"
#include "ncrs/errors.hpp"

namespace ncrs {

long long feature_configurations(int grid_area) {
    long long total = 0;
    for (long long b = 1; b <= grid_area; ++b)
        total += (b + 1) * (b + 2) / 2;
    return total;
}

const Elite* Archive::best() const {
    const Elite* best = nullptr;
    for (const auto& [key, elite] : elites)
        if (!best || elite.fitness > best->fitness)
            best = &elite;
    return best;
}

InsertOutcome archive_insert(Archive& archive, const Eigen::VectorXd& genome, double fitness, const CellKey& key,
                             int generation) {
    if (!std::isfinite(fitness))
        return {InsertStatus::Rejected, 0.0};
    auto it = archive.elites.find(key);
    if (it == archive.elites.end()) {
        archive.elites.emplace(key, Elite{genome, fitness, key, generation});
        return {InsertStatus::NewCell, fitness};
    }
    if (fitness > it->second.fitness) {
        const double gain = fitness - it->second.fitness;
        it->second = Elite{genome, fitness, key, generation};
        return {InsertStatus::Improved, gain};
    }
    return {InsertStatus::Rejected, 0.0};
}

QdMetrics qd_metrics(const Archive& archive) {
    QdMetrics m;
    if (archive.total_configurations <= 0)
        return m;
    const auto total = static_cast<double>(archive.total_configurations);
    double sum = 0.0;
    for (const auto& [key, elite] : archive.elites)
        sum += elite.fitness;
    m.cells_filled_pct = static_cast<double>(archive.size()) / total * 100.0;
    m.qd_score = sum / total;
    return m;
}

void save_archive(std::ostream& os, const Archive& archive) {
    os.write("NCRSARC\0", 8);
    bin::write_u32(os, 1);
    bin::write_u64(os, static_cast<std::uint64_t>(archive.total_configurations));
    bin::write_u64(os, archive.elites.size());
    for (const auto& [key, e] : archive.elites) {
        for (int k : key)
            bin::write_u32(os, static_cast<std::uint32_t>(k));
        bin::write_f64(os, e.fitness);
        bin::write_u32(os, static_cast<std::uint32_t>(e.generation));
        bin::write_vector(os, e.genome);
    }
}

Archive load_archive(std::istream& is) {
    bin::expect_magic(is, std::string_view("NCRSARC\0", 8));
    if (bin::read_u32(is) != 1)
        throw DataError("unsupported archive version");
    Archive a;
    a.total_configurations = static_cast<long long>(bin::read_u64(is));
    const auto n = bin::read_u64(is);
    for (std::uint64_t i = 0; i < n; ++i) {
        Elite e;
        for (int& k : e.key)
            k = static_cast<int>(bin::read_u32(is));
        e.fitness = bin::read_f64(is);
        e.generation = static_cast<int>(bin::read_u32(is));
        e.genome = bin::read_vector(is);
        a.elites.emplace(e.key, std::move(e));
    }
    return a;
}

void write_archive_dir(const std::filesystem::path& dir, const Archive& archive, const GenomeHeader& header) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream index(dir / "index.csv", std::ios::trunc);
    if (!index)
        throw DataError("cannot write archive index in '" + dir.string() + "'");
    index << "# total_configurations=" << archive.total_configurations << "\n";
    index << "sensors,actuators,body_parts,fitness,generation,genome_file\n";
    index << std::setprecision(17);
    for (const auto& [key, e] : archive.elites) {
        std::ostringstream name;
        name << "elite_s" << key[0] << "_a" << key[1] << "_b" << key[2] << ".ncrs";
        write_genome_file(dir / name.str(), GenomeFile{header, Genome(e.genome)});
        index << key[0] << ',' << key[1] << ',' << key[2] << ',' << e.fitness << ',' << e.generation << ','
              << name.str() << "\n";
    }
}

ArchiveDir read_archive_dir(const std::filesystem::path& dir) {
    std::ifstream index(dir / "index.csv");
    if (!index)
        throw DataError("no archive index in '" + dir.string() + "'");
    ArchiveDir out;
    std::string line;
    int line_no = 0;
    while (std::getline(index, line)) {
        ++line_no;
        if (line.empty())
            continue;
        if (line.rfind("# total_configurations=", 0) == 0) {
            out.archive.total_configurations = std::stoll(line.substr(23));
            continue;
        }
        if (line.rfind("sensors,", 0) == 0)
            continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ','))
            fields.push_back(field);
        if (fields.size() != 6)
            throw DataError("archive index line " + std::to_string(line_no) + ": expected 6 fields");
        Elite e;
        try {
            e.key = {std::stoi(fields[0]), std::stoi(fields[1]), std::stoi(fields[2])};
            e.fitness = std::stod(fields[3]);
            e.generation = std::stoi(fields[4]);
        } catch (const std::exception&) {
            throw DataError("archive index line " + std::to_string(line_no) + ": malformed number");
        }
        auto file = read_genome_file(dir / fields[5]);
        if (!out.header)
            out.header = file.header;
        e.genome = std::move(file.genome.params);
        out.archive.elites.emplace(e.key, std::move(e));
    }
    return out;
}

} // namespace ncrs
