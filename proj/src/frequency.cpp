#include "mfloc/frequency.hpp"

#include <cmath>
#include <numbers>

#include "mfloc/tensor_kernels.hpp"

namespace mfloc {

Eigen::MatrixXd dct_basis(Index n) {
    Eigen::MatrixXd basis(n, n);
    const double dc = std::sqrt(1.0 / static_cast<double>(n));
    const double ac = std::sqrt(2.0 / static_cast<double>(n));
    for (Index u = 0; u < n; ++u) {
        for (Index i = 0; i < n; ++i) {
            basis(u, i) = (u == 0 ? dc : ac) *
                          std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) * static_cast<double>(u) /
                                   (2.0 * static_cast<double>(n)));
        }
    }
    return basis;
}

namespace {

void require_plane(const TensorD& t, const char* op) {
    if (t.rank() != 2) throw DimensionError(std::string(op) + " expects [H,W], got " + shape_string(t.shape()));
}

}  // namespace

TensorD dct2(const TensorD& channel) {
    require_plane(channel, "dct2");
    const Eigen::MatrixXd rows = dct_basis(channel.height());
    const Eigen::MatrixXd cols = dct_basis(channel.width());
    return TensorD::from_plane(rows * channel.plane(0) * cols.transpose());
}

TensorD idct2(const TensorD& coeffs) {
    require_plane(coeffs, "idct2");
    const Eigen::MatrixXd rows = dct_basis(coeffs.height());
    const Eigen::MatrixXd cols = dct_basis(coeffs.width());
    return TensorD::from_plane(rows.transpose() * coeffs.plane(0) * cols);
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> low_frequency_mask(Index h, Index w,
                                                                                        double cutoff) {
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> low(h, w);
    const double radius = cutoff * std::numbers::sqrt2;
    for (Index u = 0; u < h; ++u) {
        for (Index v = 0; v < w; ++v) {
            const double fu = static_cast<double>(u) / static_cast<double>(h);
            const double fv = static_cast<double>(v) / static_cast<double>(w);
            low(u, v) = std::sqrt(fu * fu + fv * fv) <= radius;
        }
    }
    return low;
}

FrequencySplit frequency_split(const TensorD& image, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0)) {
        throw ParameterError("frequency_split: cutoff must lie in (0,1), got " + std::to_string(cutoff));
    }
    if (image.rank() != 2 && image.rank() != 3) {
        throw DimensionError("frequency_split expects [C,H,W], got " + shape_string(image.shape()));
    }
    const Index h = image.height();
    const Index w = image.width();
    const Eigen::MatrixXd rows = dct_basis(h);
    const Eigen::MatrixXd cols = dct_basis(w);
    const auto low_mask = low_frequency_mask(h, w, cutoff);

    FrequencySplit split{TensorD(image.shape()), TensorD(image.shape()), cutoff};
    for (Index c = 0; c < image.planes(); ++c) {
        const Eigen::MatrixXd coeffs = rows * image.plane(c) * cols.transpose();
        const Eigen::MatrixXd low = low_mask.select(coeffs, 0.0);
        const Eigen::MatrixXd high = coeffs - low;
        split.low.plane(c) = rows.transpose() * low * cols;
        split.high.plane(c) = rows.transpose() * high * cols;
    }
    return split;
}

TensorD freq_concat(const TensorD& image, const TensorD& component) {
    if (image.rank() != 3 || component.rank() != 3) {
        throw DimensionError("freq_concat expects [C,H,W] operands, got " + shape_string(image.shape()) + " and " +
                             shape_string(component.shape()));
    }
    return concat_channels(image, component);
}

TensorD srm_kernels() {
    TensorD k(Shape{3, 1, 5, 5});
    // First-order horizontal residual: x[i, j+1] - x[i, j].
    k(0, 0, 2, 2) = -1.0;
    k(0, 0, 2, 3) = 1.0;

    const double square[3][3] = {{-1, 2, -1}, {2, -4, 2}, {-1, 2, -1}};
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) k(1, 0, y + 1, x + 1) = square[y][x] / 4.0;

    const double kv[5][5] = {{-1, 2, -2, 2, -1},
                             {2, -6, 8, -6, 2},
                             {-2, 8, -12, 8, -2},
                             {2, -6, 8, -6, 2},
                             {-1, 2, -2, 2, -1}};
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) k(2, 0, y, x) = kv[y][x] / 12.0;
    return k;
}

TensorD srm_residual(const TensorD& rgb, ValueRange range) {
    if (rgb.rank() != 3 || rgb.dim(0) != 3) {
        throw DimensionError("srm_residual expects a 3-channel [3,H,W] image, got " + shape_string(rgb.shape()));
    }
    const double scale = range == ValueRange::Unit ? 255.0 : 1.0;
    TensorD gray(Shape{1, rgb.height(), rgb.width()});
    gray.plane(0) = scale * (0.299 * rgb.plane(0) + 0.587 * rgb.plane(1) + 0.114 * rgb.plane(2));

    TensorD residual = conv2d(gray, srm_kernels(), Padding::Same);
    residual.data() = residual.data().cwiseMax(-kSrmTruncation).cwiseMin(kSrmTruncation);
    return residual;
}

}  // namespace mfloc
