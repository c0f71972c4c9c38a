#include "ncrs/genome.hpp"

#include <fstream>

#include "ncrs/binary_io.hpp"
#include "ncrs/errors.hpp"

namespace ncrs {

std::string_view activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "relu";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

void write_genome(std::ostream& os, const GenomeFile& file) {
    const auto& h = file.header;
    if (file.genome.size() != genome_length(h.layout))
        throw std::invalid_argument("genome length does not match header layout");
    os.write("NCRS", 4);
    bin::write_u32(os, h.version);
    bin::write_u32(os, static_cast<std::uint32_t>(h.layout.n_total()));
    bin::write_u32(os, static_cast<std::uint32_t>(h.dims.height));
    bin::write_u32(os, static_cast<std::uint32_t>(h.dims.width));
    bin::write_u32(os, static_cast<std::uint32_t>(h.task));
    bin::write_u32(os, static_cast<std::uint32_t>(h.activation));
    bin::write_f64_array(os, file.genome.params.data(), file.genome.size());
}

GenomeFile read_genome(std::istream& is) {
    bin::expect_magic(is, "NCRS");
    GenomeFile file;
    auto& h = file.header;
    h.version = bin::read_u32(is);
    if (h.version != GenomeHeader::kVersion)
        throw DataError("unsupported genome file version " + std::to_string(h.version));
    const auto n_total = static_cast<int>(bin::read_u32(is));
    h.dims.height = static_cast<int>(bin::read_u32(is));
    h.dims.width = static_cast<int>(bin::read_u32(is));
    h.task = task_from_id(bin::read_u32(is));
    const auto act = bin::read_u32(is);
    if (act > 1)
        throw DataError("unknown activation id " + std::to_string(act));
    h.activation = static_cast<Activation>(act);

    h.layout.n_type_channels = type_channel_count(h.task);
    h.layout.n_hidden = n_total - 3 - h.layout.n_type_channels;
    if (h.layout.n_hidden < 0)
        throw DataError("channel count " + std::to_string(n_total) + " too small for task");
    if (h.dims.height <= 0 || h.dims.width <= 0 || h.dims.height > 1024 || h.dims.width > 1024
        || h.dims.height % 2 == 0 || h.dims.width % 2 == 0)
        throw DataError("grid dimensions out of range (sides must be odd, at most 1024)");

    Eigen::VectorXd params(static_cast<Eigen::Index>(genome_length(h.layout)));
    bin::read_f64_array(is, params.data(), static_cast<std::size_t>(params.size()));
    file.genome = Genome(std::move(params));
    if (!file.genome.all_finite())
        throw DataError("genome contains non-finite parameters");
    return file;
}

void write_genome_file(const std::filesystem::path& path, const GenomeFile& file) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw DataError("cannot open '" + path.string() + "' for writing");
    write_genome(os, file);
    if (!os)
        throw DataError("failed writing '" + path.string() + "'");
}

GenomeFile read_genome_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("cannot open genome file '" + path.string() + "'");
    try {
        return read_genome(is);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace ncrs
