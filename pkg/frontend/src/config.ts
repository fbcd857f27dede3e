// Base URL for the JSON API. The empty string means same-origin, which
// is right when the service serves this bundle under /ui. Point it at
// another host before building to run the UI elsewhere.
export const API_BASE = "";
