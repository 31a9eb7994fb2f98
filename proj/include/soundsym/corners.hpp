#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "soundsym/metrics.hpp"

namespace soundsym {

/// Row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct RgbImage {
    std::size_t height = 0, width = 0, channels = 3;
    std::vector<double> data;  // interleaved, values in [0,1]
    std::string id;
};

struct GrayImage {
    Matrix pixels;  // values in [0,1]
    std::string id;
};

struct CornerParams {
    int block = 5;
    int aperture = 15;
    double k = 0.04;
    int nms_window = 100;
    double rel_threshold = 0.01;
    bool max_before_nms = false;  // M over the whole map instead of over NMS survivors
};

struct CornerReport {
    std::string image_id;
    std::size_t count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> points;  // (row, col)
    double max_response = 0.0;
};

/// 0.299 R + 0.587 G + 0.114 B. Throws ChannelError unless 3 channels.
GrayImage to_grayscale(const RgbImage& img);

/// Decodes a PNG into 8-bit RGB scaled to [0,1]. Throws DecodeError.
RgbImage load_png(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG (used for fixtures and debugging).
void save_png(const std::filesystem::path& path, const GrayImage& img);

/// Sobel smoothing and derivative taps for an odd aperture (binomial smoothing,
/// difference of binomials for the derivative), unnormalized integers.
std::pair<std::vector<double>, std::vector<double>> sobel_kernels(int aperture);

/// Harris response det(M) - k trace(M)^2 of the block-summed structure tensor,
/// with negative values clamped to 0. Replicate-edge borders throughout.
Matrix harris_response(const GrayImage& img, int block = 5, int aperture = 15, double k = 0.04);

/// Pixels that are positive and the maximum of the window x window neighbourhood
/// centred on them (half-width window/2, clipped at borders). Among equal maxima
/// the first in row-major order wins.
std::vector<std::pair<std::size_t, std::size_t>> nonmax_suppress(const Matrix& resp, int window = 100);

CornerReport count_corners(const GrayImage& img, const CornerParams& params = {});
CornerReport count_corners(const RgbImage& img, const CornerParams& params = {});

struct ClassComparison {
    double sharp_mean = 0.0;
    double round_mean = 0.0;
    TestResult test;  // Welch, sharp minus round
};

ClassComparison compare_classes(const std::vector<double>& sharp_counts, const std::vector<double>& round_counts);

}  // namespace soundsym
