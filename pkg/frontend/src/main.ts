/** Browser entry point. */

import { createApp } from "./app.js";

createApp(document);
