/** Three.js scene: OSM raster tiles as the ground, one extruded cylinder per
 * place, orbit navigation, hover tooltips, and polygon drawing for region
 * selection. All numeric mapping (heights, hues) comes from columns.ts. */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";

import type { ColumnSpec, PlaceInfo } from "./columns";
import { lonLatToWorld, tileAt, tileUrl, worldToLonLat, zoomForSpan } from "./mercator";

const WORLD = 1000; // world units across the whole mercator square
const TILE_TEMPLATE = "https://tile.openstreetmap.org/{z}/{x}/{y}.png";
const NEUTRAL_COLOR = new THREE.Color("#8a9099");

export interface HoverInfo {
  placeId: string;
  name: string;
  value: number;
  colorValue: number | null;
  x: number;
  y: number;
}

export interface Map3DOptions {
  onHover: (info: HoverInfo | null) => void;
  onRegionDrawn: (ring: [number, number][]) => void;
}

export class Map3D {
  readonly maxColumnHeight: number;
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private raycaster = new THREE.Raycaster();
  private pointer = new THREE.Vector2();
  private columnGroup = new THREE.Group();
  private drawGroup = new THREE.Group();
  private ground: THREE.Mesh;
  private columnGeometry = new THREE.CylinderGeometry(1, 1, 1, 14);
  private meshes = new Map<string, THREE.Mesh>();
  private byMesh = new Map<THREE.Object3D, ColumnSpec>();
  private names = new Map<string, string>();
  private drawing = false;
  private drawVertices: THREE.Vector3[] = [];
  private columnRadius: number;

  constructor(
    private container: HTMLElement,
    places: PlaceInfo[],
    private options: Map3DOptions,
  ) {
    const width = container.clientWidth || 800;
    const height = container.clientHeight || 600;
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(width, height);
    this.renderer.setPixelRatio(window.devicePixelRatio || 1);
    container.appendChild(this.renderer.domElement);
    this.scene.background = new THREE.Color("#0d1117");

    const { center, span } = this.fitPlaces(places);
    this.maxColumnHeight = Math.max(span * 0.35, 1e-6);
    this.columnRadius = Math.max(span / 90, 1e-7);

    this.camera = new THREE.PerspectiveCamera(55, width / height, span / 1000, WORLD * 2);
    this.camera.position.set(center.x, span * 1.1, center.z + span * 0.9);

    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.copy(center);
    this.controls.maxPolarAngle = Math.PI / 2 - 0.02;
    this.controls.update();

    this.scene.add(new THREE.AmbientLight(0xffffff, 1.6));
    const sun = new THREE.DirectionalLight(0xffffff, 1.4);
    sun.position.set(center.x + span, span * 2, center.z - span);
    this.scene.add(sun);

    this.ground = this.buildGround(places, center, span);
    this.scene.add(this.columnGroup);
    this.scene.add(this.drawGroup);
    for (const p of places) this.names.set(p.id, p.name);

    this.renderer.domElement.addEventListener("pointermove", (e) => this.onPointerMove(e));
    this.renderer.domElement.addEventListener("click", (e) => this.onClick(e));
    this.renderer.domElement.addEventListener("dblclick", (e) => this.onDoubleClick(e));
    window.addEventListener("resize", () => this.onResize());

    const animate = () => {
      requestAnimationFrame(animate);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  private fitPlaces(places: PlaceInfo[]): { center: THREE.Vector3; span: number } {
    let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
    for (const p of places) {
      const w = lonLatToWorld(p.lon, p.lat);
      minX = Math.min(minX, w.x);
      maxX = Math.max(maxX, w.x);
      minY = Math.min(minY, w.y);
      maxY = Math.max(maxY, w.y);
    }
    if (!places.length) {
      minX = maxX = 0.5;
      minY = maxY = 0.5;
    }
    const span = Math.max((maxX - minX) * WORLD, (maxY - minY) * WORLD, WORLD / 2 ** 16) * 1.3;
    const center = new THREE.Vector3(
      ((minX + maxX) / 2) * WORLD,
      0,
      ((minY + maxY) / 2) * WORLD,
    );
    return { center, span };
  }

  private buildGround(places: PlaceInfo[], center: THREE.Vector3, span: number): THREE.Mesh {
    const zoom = zoomForSpan(span / WORLD, 5);
    const loader = new THREE.TextureLoader();
    loader.setCrossOrigin("anonymous");
    const n = 2 ** zoom;
    const centerTile = tileAt(center.x / WORLD, center.z / WORLD, zoom);
    const radiusTiles = Math.max(2, Math.ceil(span / WORLD * n / 2) + 1);
    const group = new THREE.Group();
    for (let dx = -radiusTiles; dx <= radiusTiles; dx++) {
      for (let dy = -radiusTiles; dy <= radiusTiles; dy++) {
        const tx = centerTile.tx + dx;
        const ty = centerTile.ty + dy;
        if (tx < 0 || ty < 0 || tx >= n || ty >= n) continue;
        const size = WORLD / n;
        const geometry = new THREE.PlaneGeometry(size, size);
        const material = new THREE.MeshBasicMaterial({ color: 0x20262e });
        const mesh = new THREE.Mesh(geometry, material);
        mesh.rotation.x = -Math.PI / 2;
        mesh.position.set((tx + 0.5) * size, -0.001 * span, (ty + 0.5) * size);
        loader.load(
          tileUrl(TILE_TEMPLATE, zoom, tx, ty),
          (texture) => {
            texture.colorSpace = THREE.SRGBColorSpace;
            material.map = texture;
            material.color.set(0xffffff);
            material.needsUpdate = true;
          },
          undefined,
          () => {
            /* offline or blocked tiles: keep the flat placeholder */
          },
        );
        group.add(mesh);
      }
    }
    this.scene.add(group);
    // invisible plane catching raycasts for polygon drawing
    const catcher = new THREE.Mesh(
      new THREE.PlaneGeometry(WORLD * 2, WORLD * 2),
      new THREE.MeshBasicMaterial({ visible: false }),
    );
    catcher.rotation.x = -Math.PI / 2;
    catcher.position.set(center.x, 0, center.z);
    this.scene.add(catcher);
    return catcher;
  }

  /** Replace the columns with the given frame layout. */
  setColumns(columns: ColumnSpec[]): void {
    const seen = new Set<string>();
    this.byMesh.clear();
    for (const column of columns) {
      seen.add(column.placeId);
      let mesh = this.meshes.get(column.placeId);
      if (!mesh) {
        mesh = new THREE.Mesh(
          this.columnGeometry,
          new THREE.MeshLambertMaterial({ color: NEUTRAL_COLOR }),
        );
        this.meshes.set(column.placeId, mesh);
        this.columnGroup.add(mesh);
      }
      const w = lonLatToWorld(column.lon, column.lat);
      const height = Math.max(column.height, 1e-9);
      mesh.visible = true;
      mesh.scale.set(this.columnRadius, height, this.columnRadius);
      mesh.position.set(w.x * WORLD, height / 2, w.y * WORLD);
      const material = mesh.material as THREE.MeshLambertMaterial;
      if (column.hue === null) {
        material.color.copy(NEUTRAL_COLOR);
      } else {
        material.color.setHSL(column.hue / 360, 1.0, 0.5);
      }
      this.byMesh.set(mesh, column);
    }
    for (const [placeId, mesh] of this.meshes) {
      if (!seen.has(placeId)) mesh.visible = false; // missing: no column
    }
  }

  startRegionDraw(): void {
    this.drawing = true;
    this.drawVertices = [];
    this.drawGroup.clear();
  }

  clearRegion(): void {
    this.drawing = false;
    this.drawVertices = [];
    this.drawGroup.clear();
  }

  private groundPoint(event: MouseEvent): THREE.Vector3 | null {
    this.setPointer(event);
    this.raycaster.setFromCamera(this.pointer, this.camera);
    const hits = this.raycaster.intersectObject(this.ground, false);
    return hits.length ? hits[0].point : null;
  }

  private setPointer(event: MouseEvent): void {
    const rect = this.renderer.domElement.getBoundingClientRect();
    this.pointer.x = ((event.clientX - rect.left) / rect.width) * 2 - 1;
    this.pointer.y = -((event.clientY - rect.top) / rect.height) * 2 + 1;
  }

  private onClick(event: MouseEvent): void {
    if (!this.drawing) return;
    const point = this.groundPoint(event);
    if (!point) return;
    this.drawVertices.push(point.clone());
    const marker = new THREE.Mesh(
      new THREE.SphereGeometry(this.columnRadius * 0.9),
      new THREE.MeshBasicMaterial({ color: 0xffcc00 }),
    );
    marker.position.copy(point);
    this.drawGroup.add(marker);
    if (this.drawVertices.length > 1) {
      const geometry = new THREE.BufferGeometry().setFromPoints(
        this.drawVertices.map((v) => new THREE.Vector3(v.x, 0.002 * WORLD, v.z)),
      );
      this.drawGroup.add(
        new THREE.Line(geometry, new THREE.LineBasicMaterial({ color: 0xffcc00 })),
      );
    }
  }

  private onDoubleClick(event: MouseEvent): void {
    if (!this.drawing || this.drawVertices.length < 3) return;
    event.preventDefault();
    this.drawing = false;
    const ring = this.drawVertices.map((v) => {
      const { lon, lat } = worldToLonLat(v.x / WORLD, v.z / WORLD);
      return [lon, lat] as [number, number];
    });
    this.options.onRegionDrawn(ring);
  }

  private onPointerMove(event: MouseEvent): void {
    this.setPointer(event);
    this.raycaster.setFromCamera(this.pointer, this.camera);
    const hits = this.raycaster.intersectObjects(this.columnGroup.children, false);
    const visible = hits.find((h) => h.object.visible);
    if (!visible) {
      this.options.onHover(null);
      return;
    }
    const column = this.byMesh.get(visible.object);
    if (!column) {
      this.options.onHover(null);
      return;
    }
    this.options.onHover({
      placeId: column.placeId,
      name: this.names.get(column.placeId) ?? column.placeId,
      value: column.value,
      colorValue: column.colorValue,
      x: event.clientX,
      y: event.clientY,
    });
  }

  private onResize(): void {
    const width = this.container.clientWidth || 800;
    const height = this.container.clientHeight || 600;
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(width, height);
  }
}
