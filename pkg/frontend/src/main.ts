import { RatingApi } from "./api.js";
import { mount } from "./ui.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
mount(root, new RatingApi(""), window.localStorage);
