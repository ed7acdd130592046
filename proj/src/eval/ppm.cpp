#include <algorithm>
#include <cmath>

#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"
#include "latsteer/io.hpp"

namespace latsteer {

std::string encode_grid_ppm(const Tensor& images, std::size_t cols) {
    if (images.rank() != 3 || images.dim(0) < 1) {
        throw ShapeError("image grid needs [n,H,W] images with n >= 1, got " + to_string(images.shape()));
    }
    if (cols < 1) throw ValidationError("image grid needs cols >= 1");
    const std::size_t n = images.dim(0), h = images.dim(1), w = images.dim(2);
    cols = std::min(cols, n);
    const std::size_t rows = (n + cols - 1) / cols;
    const std::size_t width = cols * w + (cols - 1), height = rows * h + (rows - 1);

    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + width * height * 3, '\0');
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t top = (i / cols) * (h + 1), left = (i % cols) * (w + 1);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const double v = std::clamp(images[(i * h + r) * w + c], 0.0, 1.0);
                const auto byte = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
                const std::size_t at = header + ((top + r) * width + left + c) * 3;
                out[at] = out[at + 1] = out[at + 2] = byte;
            }
    }
    return out;
}

void export_grid_ppm(const Tensor& images, std::size_t cols, const std::filesystem::path& path) {
    write_file(path, encode_grid_ppm(images, cols));
}

}  // namespace latsteer
