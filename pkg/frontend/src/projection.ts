/** Equirectangular projection into SVG pixel space.
 *
 * The viewport is a lat/lon window; cells are drawn from their exact
 * degree boundaries, so grid rectangles stay aligned with the service's
 * bin edges at every zoom.
 */

export interface Viewport {
  latMin: number;
  latMax: number;
  lonMin: number;
  lonMax: number;
}

export const WORLD: Viewport = { latMin: -90, latMax: 90, lonMin: -180, lonMax: 180 };

export interface Projection {
  x(lon: number): number;
  y(lat: number): number;
  /** Pixel rect of one grid cell anchored at its south-west corner. */
  cellRect(latMin: number, lonMin: number, binDeg: number): {
    x: number;
    y: number;
    width: number;
    height: number;
  };
  visible(lat: number, lon: number): boolean;
}

export function makeProjection(vp: Viewport, width: number, height: number): Projection {
  const lonSpan = vp.lonMax - vp.lonMin;
  const latSpan = vp.latMax - vp.latMin;
  const sx = width / lonSpan;
  const sy = height / latSpan;

  const x = (lon: number) => (lon - vp.lonMin) * sx;
  const y = (lat: number) => (vp.latMax - lat) * sy; // SVG y grows downward

  return {
    x,
    y,
    cellRect(latMin: number, lonMin: number, binDeg: number) {
      return {
        x: x(lonMin),
        y: y(latMin + binDeg),
        width: binDeg * sx,
        height: binDeg * sy,
      };
    },
    visible(lat: number, lon: number) {
      return lat >= vp.latMin && lat <= vp.latMax && lon >= vp.lonMin && lon <= vp.lonMax;
    },
  };
}
