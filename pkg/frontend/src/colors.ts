/**
 * Fixed palettes. Room colors (warm, saturated) are deliberately distinct
 * from cluster colors so thumbnails and the point cloud never read as the
 * same encoding.
 */

/** Raster label code -> fill; 0 is the empty cell. */
export const ROOM_COLORS: Record<number, string> = {
  0: "#1b1e24",
  1: "#e4a33c", // living
  2: "#c96b6b", // bedroom
  3: "#d9c148", // kitchen
  4: "#6bb5c9", // bathroom
  5: "#8fc96b", // balcony
  6: "#a47ad1", // storage
  7: "#c9c9c9", // corridor
  8: "#7d8a99", // other
};

export const CLUSTER_COLORS = [
  "#4c78a8",
  "#54a24b",
  "#e45756",
  "#79b8d1",
  "#f58518",
  "#b279a2",
  "#9d755d",
  "#bab0ac",
  "#72b7b2",
  "#eeca3b",
  "#b5ea8c",
  "#ff9da6",
];

export const UNCLUSTERED_COLOR = "#8b93a7";
export const SELECTED_COLOR = "#ffffff";

export function clusterColor(label: number | undefined | null): string {
  if (label === undefined || label === null) {
    return UNCLUSTERED_COLOR;
  }
  return CLUSTER_COLORS[label % CLUSTER_COLORS.length];
}
