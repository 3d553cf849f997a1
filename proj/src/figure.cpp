#include "haarfactor/figure.hpp"

#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace haarfactor {
namespace {

// Unit interval spans 2^kMaxGeneration x-units so every admissible dyadic
// endpoint lands on an integer.
constexpr std::int64_t kUnit = std::int64_t{1} << kMaxGeneration;
constexpr std::int64_t kRowHeight = kUnit / 16;
constexpr std::int64_t kGap = kUnit / 32;
constexpr std::int64_t kLabelHeight = kUnit / 24;
constexpr std::int64_t kStroke = kUnit / 2048;

constexpr const char* kPalette[4] = {"#4c72b0", "#dd8452", "#55a868", "#8172b3"};

}  // namespace

std::string render_interval_rows(const std::vector<FigureRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("figure needs at least one row");
  const std::int64_t band = kLabelHeight + kRowHeight + kGap;
  const std::int64_t height = kGap + static_cast<std::int64_t>(rows.size()) * band;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kUnit << ' ' << height
      << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kUnit << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";

  std::int64_t y = kGap;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const FigureRow& row = rows[r];
    const char* color = kPalette[r % 4];
    svg << "<text x=\"0\" y=\"" << (y + kLabelHeight - kGap / 4) << "\" font-family=\"monospace\""
        << " font-size=\"" << kLabelHeight << "\" fill=\"#333333\">" << row.label << "</text>\n";
    const std::int64_t band_y = y + kLabelHeight;
    // Gray track so gaps in the collection read as gaps, not as page.
    svg << "<rect x=\"0\" y=\"" << band_y << "\" width=\"" << kUnit << "\" height=\"" << kRowHeight
        << "\" fill=\"#e8e8e8\"/>\n";
    for (const DyadicInterval& iv : row.intervals) {
      if (iv.n < 0 || iv.n > kMaxGeneration) {
        throw std::invalid_argument("figure interval generation out of range");
      }
      const std::int64_t w = kUnit >> iv.n;
      const std::int64_t x = iv.k * w;
      svg << "<rect x=\"" << x << "\" y=\"" << band_y << "\" width=\"" << w << "\" height=\""
          << kRowHeight << "\" fill=\"" << color << "\" stroke=\"#ffffff\" stroke-width=\""
          << kStroke << "\" shape-rendering=\"crispEdges\"/>\n";
    }
    y += band;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace haarfactor
