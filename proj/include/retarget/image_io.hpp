#pragma once

// PNG/JPEG codecs backed by OpenCV's imgcodecs. Rasters are stored as
// gray, RGB or RGBA; OpenCV's BGR(A) order is swapped at this boundary.

#include <retarget/errors.hpp>
#include <retarget/raster.hpp>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace retarget {

namespace detail {

inline RasterImage from_mat(const cv::Mat& decoded)
{
    if (decoded.empty()) throw Error(ErrorCode::InvalidInput, "unsupported or corrupt image data");
    cv::Mat mat = decoded;
    if (mat.depth() != CV_8U) {
        const double scale = mat.depth() == CV_16U ? 1.0 / 257.0 : 1.0;
        mat.convertTo(mat, CV_8U, scale);
    }
    const int ch = mat.channels();
    if (ch != 1 && ch != 3 && ch != 4) throw Error(ErrorCode::InvalidInput, "unsupported channel count");
    RasterImage out(mat.cols, mat.rows, ch);
    for (int y = 0; y < mat.rows; ++y) {
        const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
        std::copy(row, row + static_cast<std::ptrdiff_t>(mat.cols) * ch, &out.data[out.index(0, y, 0)]);
    }
    if (ch >= 3)
        for (std::size_t i = 0; i < out.data.size(); i += static_cast<std::size_t>(ch))
            std::swap(out.data[i], out.data[i + 2]);
    return out;
}

inline cv::Mat to_mat(const RasterImage& img)
{
    cv::Mat mat(img.height, img.width, CV_8UC(img.channels));
    for (int y = 0; y < img.height; ++y)
        std::copy_n(&img.data[img.index(0, y, 0)], static_cast<std::ptrdiff_t>(img.width) * img.channels,
                    mat.ptr<std::uint8_t>(y));
    if (img.channels >= 3) {
        for (int y = 0; y < img.height; ++y) {
            std::uint8_t* row = mat.ptr<std::uint8_t>(y);
            for (int x = 0; x < img.width; ++x) std::swap(row[x * img.channels], row[x * img.channels + 2]);
        }
    }
    return mat;
}

} // namespace detail

inline RasterImage decode_image(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.empty()) throw Error(ErrorCode::InvalidInput, "empty image data");
    const bool png = bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G';
    const bool jpeg = bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
    if (!png && !jpeg) throw Error(ErrorCode::InvalidInput, "image data is neither PNG nor JPEG");
    return detail::from_mat(cv::imdecode(cv::Mat(bytes), cv::IMREAD_UNCHANGED));
}

inline RasterImage read_image(const std::string& path)
{
    cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (mat.empty()) throw Error(ErrorCode::InvalidInput, "cannot read image " + path);
    return detail::from_mat(mat);
}

inline std::vector<std::uint8_t> encode_png(const RasterImage& img)
{
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", detail::to_mat(img), out))
        throw Error(ErrorCode::InvalidInput, "PNG encoding failed");
    return out;
}

/// Format follows the extension (.png, .jpg, .jpeg).
inline void write_image(const std::string& path, const RasterImage& img)
{
    bool ok = false;
    try {
        ok = cv::imwrite(path, detail::to_mat(img));
    } catch (const cv::Exception& e) {
        throw Error(ErrorCode::InvalidInput, "cannot write image " + path + ": " + e.what());
    }
    if (!ok) throw Error(ErrorCode::InvalidInput, "cannot write image " + path);
}

} // namespace retarget
