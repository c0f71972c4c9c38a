#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include <Eigen/Core>

#include "ncrs/cell_grid.hpp"
#include "ncrs/task.hpp"

namespace ncrs {

/// Hidden-layer nonlinearity of the update network. Values are on-disk ids.
enum class Activation : std::uint32_t { Relu = 0, Tanh = 1 };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

inline constexpr int kConvFilters = 30;
inline constexpr int kDenseWidth = 30;
inline constexpr int kKernelCells = 9;

/// Trainable parameters of the update network for a layout:
/// conv (30 filters over a 3x3xn patch) + bias, dense 30->30 + bias, dense 30->n + bias.
constexpr std::size_t genome_length(const ChannelLayout& layout) {
    const std::size_t n = static_cast<std::size_t>(layout.n_total());
    return kConvFilters * kKernelCells * n + kConvFilters
         + kDenseWidth * kConvFilters + kDenseWidth
         + n * kDenseWidth + n;
}

/// Offsets of each weight block inside the flat parameter vector.
///
/// Order: conv weights [filter][dy][dx][channel], conv biases [filter],
/// dense-1 weights [out][in], dense-1 biases, dense-2 weights [out channel][in],
/// dense-2 biases. dy/dx run over -1..1 in row-major order.
struct GenomeLayout {
    std::size_t conv_w = 0, conv_b = 0, dense1_w = 0, dense1_b = 0, dense2_w = 0, dense2_b = 0, total = 0;

    static constexpr GenomeLayout of(const ChannelLayout& layout) {
        const std::size_t n = static_cast<std::size_t>(layout.n_total());
        GenomeLayout g;
        g.conv_w = 0;
        g.conv_b = g.conv_w + kConvFilters * kKernelCells * n;
        g.dense1_w = g.conv_b + kConvFilters;
        g.dense1_b = g.dense1_w + kDenseWidth * kConvFilters;
        g.dense2_w = g.dense1_b + kDenseWidth;
        g.dense2_b = g.dense2_w + n * kDenseWidth;
        g.total = g.dense2_b + n;
        return g;
    }
};

/// Flat parameter vector of the update network.
struct Genome {
    Eigen::VectorXd params;

    Genome() = default;
    explicit Genome(Eigen::VectorXd p) : params(std::move(p)) {}

    static Genome zeros(const ChannelLayout& layout) {
        return Genome(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(genome_length(layout))));
    }

    std::size_t size() const { return static_cast<std::size_t>(params.size()); }
    bool all_finite() const { return params.allFinite(); }
};

/// Everything stored in a genome file besides the parameters.
struct GenomeHeader {
    static constexpr std::uint32_t kVersion = 1;
    std::uint32_t version = kVersion;
    ChannelLayout layout;
    GridDims dims;
    Task task = Task::LightChasing;
    Activation activation = Activation::Relu;
};

struct GenomeFile {
    GenomeHeader header;
    Genome genome;
};

/// Binary genome file: "NCRS", version, n_total, height, width, task id, activation id
/// (all u32 LE), then the parameters as LE float64.
void write_genome_file(const std::filesystem::path& path, const GenomeFile& file);
GenomeFile read_genome_file(const std::filesystem::path& path);

void write_genome(std::ostream& os, const GenomeFile& file);
GenomeFile read_genome(std::istream& is);

} // namespace ncrs
