#include "soundsym/corners.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "soundsym/errors.hpp"

namespace soundsym {

namespace {

std::size_t clamp_index(long long i, std::size_t n) {
    if (i < 0) return 0;
    if (i >= static_cast<long long>(n)) return n - 1;
    return static_cast<std::size_t>(i);
}

// Separable correlation with replicate borders: `along_cols` runs along each
// row (x), `along_rows` down each column (y).
Matrix separable(const Matrix& src, const std::vector<double>& along_cols, const std::vector<double>& along_rows) {
    const long long hx = static_cast<long long>(along_cols.size() / 2);
    const long long hy = static_cast<long long>(along_rows.size() / 2);
    Matrix tmp(src.rows, src.cols);
    for (std::size_t r = 0; r < src.rows; ++r) {
        for (std::size_t c = 0; c < src.cols; ++c) {
            double s = 0.0;
            for (long long t = -hx; t <= hx; ++t) {
                s += along_cols[static_cast<std::size_t>(t + hx)] * src(r, clamp_index(static_cast<long long>(c) + t, src.cols));
            }
            tmp(r, c) = s;
        }
    }
    Matrix out(src.rows, src.cols);
    for (std::size_t r = 0; r < src.rows; ++r) {
        for (std::size_t c = 0; c < src.cols; ++c) {
            double s = 0.0;
            for (long long t = -hy; t <= hy; ++t) {
                s += along_rows[static_cast<std::size_t>(t + hy)] * tmp(clamp_index(static_cast<long long>(r) + t, src.rows), c);
            }
            out(r, c) = s;
        }
    }
    return out;
}

// Unnormalized block x block sum; the anchor sits at block/2 as in a centred box filter.
Matrix box_sum(const Matrix& src, int block) {
    std::vector<double> ones(static_cast<std::size_t>(block), 1.0);
    if (block % 2 == 1) return separable(src, ones, ones);
    // Even blocks: offsets -block/2 .. block/2 - 1.
    const long long lo = -block / 2, hi = block / 2 - 1;
    Matrix tmp(src.rows, src.cols), out(src.rows, src.cols);
    for (std::size_t r = 0; r < src.rows; ++r)
        for (std::size_t c = 0; c < src.cols; ++c) {
            double s = 0.0;
            for (long long t = lo; t <= hi; ++t) s += src(r, clamp_index(static_cast<long long>(c) + t, src.cols));
            tmp(r, c) = s;
        }
    for (std::size_t r = 0; r < src.rows; ++r)
        for (std::size_t c = 0; c < src.cols; ++c) {
            double s = 0.0;
            for (long long t = lo; t <= hi; ++t) s += tmp(clamp_index(static_cast<long long>(r) + t, src.rows), c);
            out(r, c) = s;
        }
    return out;
}

// Running maximum over [i - half, i + half] along one axis.
void running_max(const double* in, double* out, std::size_t n, std::size_t stride, std::size_t half) {
    std::deque<std::size_t> q;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t hi = std::min(n - 1, i + half);
        for (; next <= hi; ++next) {
            while (!q.empty() && in[q.back() * stride] <= in[next * stride]) q.pop_back();
            q.push_back(next);
        }
        const std::size_t lo = i >= half ? i - half : 0;
        while (q.front() < lo) q.pop_front();
        out[i * stride] = in[q.front() * stride];
    }
}

}  // namespace

GrayImage to_grayscale(const RgbImage& img) {
    if (img.channels != 3) {
        throw ChannelError("expected a 3-channel image, got " + std::to_string(img.channels) + " channels");
    }
    if (img.data.size() != img.height * img.width * 3) throw InvalidArgumentError("RGB buffer size mismatch");
    GrayImage g{Matrix(img.height, img.width), img.id};
    for (std::size_t i = 0; i < img.height * img.width; ++i) {
        g.pixels.data[i] = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] + 0.114 * img.data[3 * i + 2];
    }
    return g;
}

RgbImage load_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw DecodeError("cannot decode " + path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
    png_color background{0, 0, 0};
    if (!png_image_finish_read(&image, &background, buf.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("cannot decode " + path.string() + ": " + msg);
    }
    RgbImage out;
    out.height = image.height;
    out.width = image.width;
    out.channels = 3;
    out.id = path.filename().string();
    out.data.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] / 255.0;
    return out;
}

void save_png(const std::filesystem::path& path, const GrayImage& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.pixels.cols);
    image.height = static_cast<png_uint_32>(img.pixels.rows);
    image.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buf(img.pixels.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        buf[i] = static_cast<png_byte>(std::lround(std::clamp(img.pixels.data[i], 0.0, 1.0) * 255.0));
    }
    if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
        throw IoError("cannot write " + path.string() + ": " + image.message);
    }
}

std::pair<std::vector<double>, std::vector<double>> sobel_kernels(int aperture) {
    if (aperture < 3 || aperture % 2 == 0) {
        throw InvalidArgumentError("Sobel aperture must be odd and at least 3, got " + std::to_string(aperture));
    }
    const std::size_t n = static_cast<std::size_t>(aperture);
    // Binomial row of order n-1 for smoothing.
    std::vector<double> smooth(n, 0.0);
    smooth[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = i; j > 0; --j) smooth[j] += smooth[j - 1];
    // Binomial row of order n-2 followed by a first difference.
    std::vector<double> base(n - 1, 0.0);
    base[0] = 1.0;
    for (std::size_t i = 1; i < n - 1; ++i)
        for (std::size_t j = i; j > 0; --j) base[j] += base[j - 1];
    std::vector<double> deriv(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double left = j > 0 ? base[j - 1] : 0.0;
        double right = j < n - 1 ? base[j] : 0.0;
        deriv[j] = left - right;
    }
    return {smooth, deriv};
}

Matrix harris_response(const GrayImage& img, int block, int aperture, double k) {
    const Matrix& src = img.pixels;
    if (src.rows < 3 || src.cols < 3) throw InvalidArgumentError("image must be at least 3x3");
    if (block < 1) throw InvalidArgumentError("block size must be at least 1");
    auto [smooth, deriv] = sobel_kernels(aperture);

    Matrix ix = separable(src, deriv, smooth);
    Matrix iy = separable(src, smooth, deriv);
    const double scale = 1.0 / (std::ldexp(1.0, aperture - 1) * block);

    Matrix xx(src.rows, src.cols), xy(src.rows, src.cols), yy(src.rows, src.cols);
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        const double dx = ix.data[i] * scale, dy = iy.data[i] * scale;
        xx.data[i] = dx * dx;
        xy.data[i] = dx * dy;
        yy.data[i] = dy * dy;
    }
    xx = box_sum(xx, block);
    xy = box_sum(xy, block);
    yy = box_sum(yy, block);

    Matrix resp(src.rows, src.cols);
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        const double a = xx.data[i], b = xy.data[i], c = yy.data[i];
        const double r = a * c - b * b - k * (a + c) * (a + c);
        resp.data[i] = r > 0.0 ? r : 0.0;
    }
    return resp;
}

std::vector<std::pair<std::size_t, std::size_t>> nonmax_suppress(const Matrix& resp, int window) {
    if (window < 1) throw InvalidArgumentError("NMS window must be at least 1");
    if (resp.rows == 0 || resp.cols == 0) return {};
    const std::size_t half = static_cast<std::size_t>(window / 2);

    Matrix rowmax(resp.rows, resp.cols), winmax(resp.rows, resp.cols);
    for (std::size_t r = 0; r < resp.rows; ++r) running_max(&resp.data[r * resp.cols], &rowmax.data[r * resp.cols], resp.cols, 1, half);
    for (std::size_t c = 0; c < resp.cols; ++c) running_max(&rowmax.data[c], &winmax.data[c], resp.rows, resp.cols, half);

    // Equal-valued maxima can share a window; keep the first in row-major order
    // and suppress later ones within reach of an already accepted survivor.
    const std::size_t cell = half + 1;
    std::unordered_map<std::size_t, std::vector<std::size_t>> buckets;
    const std::size_t bucket_cols = resp.cols / cell + 1;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < resp.rows; ++r) {
        for (std::size_t c = 0; c < resp.cols; ++c) {
            const double v = resp(r, c);
            if (!(v > 0.0) || v != winmax(r, c)) continue;
            const std::size_t br = r / cell, bc = c / cell;
            bool dominated = false;
            for (std::size_t rr = br > 0 ? br - 1 : 0; rr <= br + 1 && !dominated; ++rr) {
                for (std::size_t cc = bc > 0 ? bc - 1 : 0; cc <= bc + 1 && !dominated; ++cc) {
                    auto it = buckets.find(rr * bucket_cols + cc);
                    if (it == buckets.end()) continue;
                    for (std::size_t idx : it->second) {
                        auto [pr, pc] = out[idx];
                        const std::size_t dr = pr > r ? pr - r : r - pr;
                        const std::size_t dc = pc > c ? pc - c : c - pc;
                        if (dr <= half && dc <= half && resp(pr, pc) == v) {
                            dominated = true;
                            break;
                        }
                    }
                }
            }
            if (dominated) continue;
            buckets[br * bucket_cols + bc].push_back(out.size());
            out.emplace_back(r, c);
        }
    }
    return out;
}

CornerReport count_corners(const GrayImage& img, const CornerParams& params) {
    Matrix resp = harris_response(img, params.block, params.aperture, params.k);
    auto survivors = nonmax_suppress(resp, params.nms_window);

    CornerReport report;
    report.image_id = img.id;
    double m = 0.0;
    if (params.max_before_nms) {
        for (double v : resp.data) m = std::max(m, v);
    } else {
        for (auto [r, c] : survivors) m = std::max(m, resp(r, c));
    }
    report.max_response = m;
    if (m == 0.0) return report;
    const double threshold = params.rel_threshold * m;
    for (auto [r, c] : survivors) {
        if (resp(r, c) > threshold) report.points.emplace_back(r, c);
    }
    report.count = report.points.size();
    return report;
}

CornerReport count_corners(const RgbImage& img, const CornerParams& params) {
    return count_corners(to_grayscale(img), params);
}

ClassComparison compare_classes(const std::vector<double>& sharp_counts, const std::vector<double>& round_counts) {
    if (sharp_counts.size() < 2 || round_counts.size() < 2) {
        throw InvalidArgumentError("compare_classes needs at least two images per class");
    }
    ClassComparison out;
    out.sharp_mean = mean(sharp_counts);
    out.round_mean = mean(round_counts);
    out.test = welch_t_test(sharp_counts, round_counts);
    return out;
}

}  // namespace soundsym
